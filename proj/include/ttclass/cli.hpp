#pragma once

#include <cstdint>
#include <string>

#include "ttclass/arr.hpp"
#include "ttclass/mandy.hpp"

namespace ttclass::cli {

enum class Command { Train, Evaluate, Classify, Sensitivity, Confusion };
enum class Method { Mandy, Arr };

/// Fully resolved run parameters. Every report embeds these, defaults
/// materialized, so outputs are reproducible from the report alone.
struct RunConfig {
    Command command{Command::Train};
    Method method{Method::Mandy};
    double alpha{kDefaultAlpha};
    arr::ArrConfig arr;
    double ridge{0.0};
    Eigen::Index train_count{0};  ///< 0 = use all samples
    Eigen::Index test_count{0};   ///< 0 = use all samples
    bool reduce{false};           ///< 2x2 mean pooling before anything else
    bool fashion{false};          ///< use the fashion class-name table
    std::string images_path;
    std::string labels_path;
    std::string model_path;  ///< input model for the non-train commands
    std::string out_dir{"."};
    std::uint64_t seed{42};
    int workers{0};  ///< 0 = all logical cores
    Eigen::Index gram_cap{mandy::kDefaultGramCap};
    double sensitivity_baseline{0.5};

    void validate() const;
};

/// Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.
int exit_code_for(const std::exception& error) noexcept;

void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_classify(const RunConfig& cfg);
void cmd_sensitivity(const RunConfig& cfg);
void cmd_confusion(const RunConfig& cfg);

/// Dispatch on cfg.command; exceptions map to the exit-code table.
int run(const RunConfig& cfg) noexcept;

}  // namespace ttclass::cli
