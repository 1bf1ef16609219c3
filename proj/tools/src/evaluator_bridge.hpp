#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <sys/types.h>

#include "bbo/core.hpp"
#include "config.hpp"

namespace bbo::cli {

/// A child process speaking the line protocol: one line of space-separated
/// coordinates in, one real number out.
///
/// Throws EvaluatorTimeout when no answer arrives in time (the child is then
/// killed) and EvaluatorProtocol on non-numeric or non-finite output, or when
/// the child exits.
class EvaluatorProcess {
public:
    EvaluatorProcess(const std::vector<std::string>& command, std::chrono::milliseconds timeout);
    ~EvaluatorProcess();
    EvaluatorProcess(const EvaluatorProcess&) = delete;
    EvaluatorProcess& operator=(const EvaluatorProcess&) = delete;

    double evaluate(std::span<const double> x);

private:
    std::string read_line();
    void terminate();

    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::chrono::milliseconds timeout_;
};

/// Fitness backed by one evaluator process on the spec's box.
FitnessFunction make_external_fitness(const EvaluatorSpec& spec,
                                      std::optional<std::size_t> budget = std::nullopt);

} // namespace bbo::cli
