#pragma once

#include "dfgeo/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dfgeo {

enum class SuiteLevel { quick, full };

// One randomized or curated check. exact = residuals compared to zero in
// rational arithmetic; float checks report the worst |residual| instead.
struct InstanceOutcome {
    bool pass = true;
    bool exact = true;
    double residual = 0.0;
    std::string note;
};

struct BatchCtx {
    std::size_t index = 0;  // instance number, used to pin curated cases
    bool corrupt = false;   // test hook: sabotages the computation under test
};

struct BatchSpec {
    std::string label; // identity tag used in reports
    int quick = 0;
    int full = 0;
    std::function<InstanceOutcome(Rng&, const BatchCtx&)> run;
};

// Declaration order is report order.
const std::vector<BatchSpec>& suite_batches();
const BatchSpec* find_batch(const std::string& label);

struct BatchResult {
    std::string label;
    int instances = 0;
    int failures = 0;
    bool exact = true;        // every instance used rational comparisons only
    double max_residual = 0.0;
    long long micros = 0;
    std::string note;         // first failure note
};

BatchResult run_batch(const BatchSpec& batch, int count, std::uint64_t seed,
                      bool corrupt = false);

struct SuiteReport {
    SuiteLevel level = SuiteLevel::quick;
    std::uint64_t seed = 0;
    std::vector<BatchResult> batches;
    int total_instances = 0;
    int total_failures = 0;
    long long micros = 0;

    bool passed() const { return total_failures == 0; }
};

// corrupt_label names a batch to sabotage through its test hook (negative
// control); empty string runs every batch honestly.
SuiteReport run_identity_suite(SuiteLevel level, std::uint64_t seed,
                               const std::string& corrupt_label = "");

// Honors DFGEO_THREADS (defaults to the hardware count, capped at 8). fn(i)
// must write only to caller-owned slot i; results merge in index order, so
// the outcome does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

std::uint64_t batch_tag(const std::string& label);

} // namespace dfgeo
