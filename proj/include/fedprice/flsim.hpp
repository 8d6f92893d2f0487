#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedprice/aggregation.hpp"
#include "fedprice/binary_game.hpp"
#include "fedprice/pricing.hpp"

namespace fedprice {

struct Dataset {
    std::vector<ParameterVector> features;
    std::vector<double> labels;  // -1 / +1

    std::size_t size() const { return labels.size(); }
};

struct SvmConfig {
    double lambda_reg = 0.1;
    int dim = 5;
    int samples_per_client = 1000;
    double margin = 2.0;      // distance between the two cluster means
    double noise_std = 0.35;  // per-coordinate cluster spread
};

// Two Gaussian clusters with a planted separating hyperplane along the first
// coordinate. Deterministic per (seed, client); per-client shards disjoint.
std::vector<Dataset> generate_synthetic(const SvmConfig& cfg, int n_clients,
                                        std::uint64_t seed);

// IDX (big-endian) ingestion: images magic 0x00000803, labels 0x00000801.
std::vector<std::vector<std::uint8_t>> load_idx_images(const std::string& path);
std::vector<std::uint8_t> load_idx_labels(const std::string& path);

// Pixels scaled to [0,1]; only the two digits kept, mapped to -1/+1.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int digit_neg, int digit_pos);

double local_loss(const ParameterVector& w, const Dataset& data, const SvmConfig& cfg);

// grad of (lambda/2)||w||^2 + (1/2|D|) sum max(0, 1 - y w.x)^2
ParameterVector local_gradient(const ParameterVector& w, const Dataset& data,
                               const SvmConfig& cfg);

// lambda + mean ||x||^2, an upper proxy for the Hessian norm.
double estimate_smoothness(const std::vector<Dataset>& datasets, const SvmConfig& cfg);

// Full-batch centralized descent to gradient norm <= tol; throws when the
// iteration budget is exhausted before the tolerance is met.
ParameterVector reference_optimum(const std::vector<Dataset>& datasets, const SvmConfig& cfg,
                                  double tol = 1e-10, int max_iters = 2000000);

enum class AggregationRule { Mean, Mle, MlePresumed };

struct FederationOptions {
    AggregationRule rule = AggregationRule::Mle;
    std::vector<double> presumed_sigmas;  // for MlePresumed
    const PricingScheme* scheme = nullptr;
    const BinaryTypeModel* model = nullptr;  // for incomplete-info prices
    std::vector<double> reports;             // reported types, incomplete mode
    int local_steps = 1;
    double blowup_bound = 1e8;  // run error when the loss exceeds this
};

struct FederationTrace {
    std::vector<double> global_loss;              // F(w-bar^(t)) on pooled data, per round
    std::vector<std::vector<double>> prices;      // per round x client (empty when unpriced)
    std::vector<double> cumulative_prices;        // per client
    std::vector<double> sigmas;                   // per client
    ParameterVector final_w;
    int rounds = 0;
};

FederationTrace run_federation(const std::vector<Dataset>& datasets, const NoiseProfile& noise,
                               const FederationOptions& opts, const SvmConfig& cfg,
                               const LearningConfig& lcfg, std::uint64_t seed);

// F(w^(T)) - F(w*) on the pooled dataset.
double empirical_loss_gap(const FederationTrace& trace, const ParameterVector& reference,
                          const std::vector<Dataset>& datasets, const SvmConfig& cfg);

// Trace export: header, one row per (round, client), then a summary row.
std::string trace_to_csv(const FederationTrace& trace);

}  // namespace fedprice
