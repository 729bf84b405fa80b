#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spinflow {

struct CheckResult {
    std::string name;
    std::string module;
    std::string anchor;    // the statement the check is tied to
    std::string manifold;  // empty for manifold independent checks
    int criterion = 0;     // acceptance criterion number, 0 when none
    double value = 0.0;    // worst residual observed
    double tolerance = 0.0;
    bool pass = false;     // value <= tolerance
    std::string detail;    // error text when the check threw
    double seconds = 0.0;  // wall time, not part of any artifact
};

struct VerifyOptions {
    std::vector<std::string> manifolds;  // empty: all catalog entries
    std::uint64_t seed = 12345;
    int samples = 10;  // random (y, eta) per manifold for the numeric fit comparison
    int threads = 1;
};

std::vector<CheckResult> verify_all(const VerifyOptions& opt);

// seed for a named check, independent of scheduling
std::uint64_t check_seed(std::uint64_t seed, const std::string& name);

// threads from SPINFLOW_THREADS, capped at the hardware concurrency; 1 when unset
int thread_cap();

}  // namespace spinflow
