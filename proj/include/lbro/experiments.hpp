#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lbro/diagnostics.hpp"
#include "lbro/svdapprox.hpp"

namespace lbro {

struct ExperimentConfig {
    std::string out_dir = ".";
    std::string matrix_dir;                ///< where <name>.mtx of the corpus is looked up
    std::optional<Precision> precision;    ///< fig3/table2: both when unset
    Index k = 100;
    Index k_small = 250;                   ///< table2: steps for the smallest pair
    Index n = 800;                         ///< size of the generated test matrix
    double eta = 1e-10;
};

struct ExperimentOutput {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    std::map<std::string, double> summary;
};

/// Corpus operator from matrix_dir when the file exists, otherwise the
/// generated substitute (a warning is appended).
LinearOperator corpus_operator(const std::string& name, const std::string& matrix_dir,
                               std::vector<std::string>& warnings);

/// Full (fig1) or partial (fig2) reorthogonalization traces on the corpus.
ExperimentOutput experiment_fig1(const ExperimentConfig& cfg);
ExperimentOutput experiment_fig2(const ExperimentConfig& cfg);
/// Convergence of the four largest Ritz values on the generated matrix.
ExperimentOutput experiment_fig3(const ExperimentConfig& cfg);
/// Accuracy of the doubled largest and smallest singular values.
ExperimentOutput experiment_table2(const ExperimentConfig& cfg);

struct Table2Values {
    double s1 = 0.0;                ///< s_1 at step k
    double s2 = 0.0;                ///< s_2 at step k
    double rel_err_s1 = 0.0;
    double rel_err_s2 = 0.0;
    double gap_s1_s2 = 0.0;
    double s_min = 0.0;             ///< smallest Ritz value at step k_small
    double s_min_prev = 0.0;        ///< smallest Ritz value at step k_small - 1
    double s_second = 0.0;          ///< second smallest Ritz value at step k_small
    double rel_err_s_min = 0.0;
    double rel_err_s_min_prev = 0.0;
    double rel_err_s_second = 0.0;
    double gap_min = 0.0;           ///< |s_min - s_min_prev|
    double gap_min_second = 0.0;    ///< |s_min - s_second|
    bool s1_s2_converged = false;
};

/// Full reorthogonalization runs on the n x n generated matrix with b = ones.
Table2Values table2_values(Precision precision, Index n = 800, Index k = 100, Index k_small = 250);

/// key=value lines, 17 significant digits.
void write_summary(const std::string& path, const std::map<std::string, double>& values);

}  // namespace lbro
