#pragma once

#include <stdexcept>
#include <string>

namespace geontd {

// Raised for malformed or inconsistent caller input. The CLI maps this to exit code 1.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Failure inside one pipeline stage; stage() is one of
// "ingest", "tensorize", "solve", "patterns", "report", "bench".
// input_caused() separates rejected input (exit code 1) from internal faults (exit code 2).
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what, bool input_caused = true)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), input_caused_(input_caused) {}

    const std::string& stage() const noexcept { return stage_; }
    bool input_caused() const noexcept { return input_caused_; }

private:
    std::string stage_;
    bool input_caused_;
};

}  // namespace geontd
