#include "fedprice/flsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedprice/mechanism.hpp"
#include "fedprice/rng.hpp"

namespace fedprice {

std::vector<Dataset> generate_synthetic(const SvmConfig& cfg, int n_clients,
                                        std::uint64_t seed) {
    if (n_clients < 1) throw std::invalid_argument("generate_synthetic: n_clients >= 1");
    std::vector<Dataset> out(n_clients);
    for (int c = 0; c < n_clients; ++c) {
        Rng rng(seed, /*stream=*/1, /*substream=*/static_cast<std::uint64_t>(c));
        Dataset& d = out[c];
        d.features.reserve(cfg.samples_per_client);
        d.labels.reserve(cfg.samples_per_client);
        for (int s = 0; s < cfg.samples_per_client; ++s) {
            const double y = (rng.next_uniform() < 0.5) ? -1.0 : 1.0;
            ParameterVector x(cfg.dim);
            for (int k = 0; k < cfg.dim; ++k) x[k] = rng.gaussian(0.0, cfg.noise_std);
            x[0] += y * cfg.margin / 2.0;
            d.features.push_back(std::move(x));
            d.labels.push_back(y);
        }
    }
    return out;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path, std::size_t offset) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw std::runtime_error("IDX parse error in " + path + ": truncated at byte " +
                                 std::to_string(offset));
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

std::vector<std::vector<std::uint8_t>> load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_idx_images: cannot open " + path);
    const std::uint32_t magic = read_be32(in, path, 0);
    if (magic != 0x00000803u) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "expected 0x00000803, found 0x%08x", magic);
        throw std::runtime_error("IDX parse error in " + path + " at byte 0: " + buf);
    }
    const std::uint32_t count = read_be32(in, path, 4);
    const std::uint32_t rows = read_be32(in, path, 8);
    const std::uint32_t cols = read_be32(in, path, 12);
    std::vector<std::vector<std::uint8_t>> images(count);
    const std::size_t npix = std::size_t(rows) * cols;
    for (std::uint32_t i = 0; i < count; ++i) {
        images[i].resize(npix);
        in.read(reinterpret_cast<char*>(images[i].data()), npix);
        if (!in)
            throw std::runtime_error("IDX parse error in " + path + ": truncated at byte " +
                                     std::to_string(16 + std::size_t(i) * npix));
    }
    return images;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_idx_labels: cannot open " + path);
    const std::uint32_t magic = read_be32(in, path, 0);
    if (magic != 0x00000801u) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "expected 0x00000801, found 0x%08x", magic);
        throw std::runtime_error("IDX parse error in " + path + " at byte 0: " + buf);
    }
    const std::uint32_t count = read_be32(in, path, 4);
    std::vector<std::uint8_t> labels(count);
    in.read(reinterpret_cast<char*>(labels.data()), count);
    if (!in)
        throw std::runtime_error("IDX parse error in " + path + ": truncated at byte 8");
    return labels;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int digit_neg, int digit_pos) {
    const auto images = load_idx_images(images_path);
    const auto labels = load_idx_labels(labels_path);
    if (images.size() != labels.size())
        throw std::runtime_error("load_idx: image/label count mismatch");
    Dataset d;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (labels[i] != digit_neg && labels[i] != digit_pos) continue;
        ParameterVector x(images[i].size());
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = images[i][k] / 255.0;
        d.features.push_back(std::move(x));
        d.labels.push_back(labels[i] == digit_pos ? 1.0 : -1.0);
    }
    return d;
}

double local_loss(const ParameterVector& w, const Dataset& data, const SvmConfig& cfg) {
    double hinge = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) dot += w[k] * data.features[j][k];
        const double m = std::max(0.0, 1.0 - data.labels[j] * dot);
        hinge += m * m;
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return 0.5 * cfg.lambda_reg * reg + 0.5 * hinge / static_cast<double>(data.size());
}

ParameterVector local_gradient(const ParameterVector& w, const Dataset& data,
                               const SvmConfig& cfg) {
    ParameterVector g(w.size(), 0.0);
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (data.features[j].size() != w.size())
            throw std::invalid_argument("local_gradient: dimension mismatch");
        double dot = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) dot += w[k] * data.features[j][k];
        const double m = std::max(0.0, 1.0 - data.labels[j] * dot);
        if (m > 0.0)
            for (std::size_t k = 0; k < w.size(); ++k)
                g[k] -= data.labels[j] * data.features[j][k] * m;
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    for (std::size_t k = 0; k < w.size(); ++k) g[k] = cfg.lambda_reg * w[k] + g[k] * inv;
    return g;
}

double estimate_smoothness(const std::vector<Dataset>& datasets, const SvmConfig& cfg) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& d : datasets) {
        for (const auto& x : d.features) {
            double n2 = 0.0;
            for (double v : x) n2 += v * v;
            sum += n2;
        }
        count += d.size();
    }
    return cfg.lambda_reg + sum / static_cast<double>(count);
}

namespace {

Dataset pool(const std::vector<Dataset>& datasets) {
    Dataset all;
    for (const auto& d : datasets) {
        all.features.insert(all.features.end(), d.features.begin(), d.features.end());
        all.labels.insert(all.labels.end(), d.labels.begin(), d.labels.end());
    }
    return all;
}

}  // namespace

ParameterVector reference_optimum(const std::vector<Dataset>& datasets, const SvmConfig& cfg,
                                  double tol, int max_iters) {
    const Dataset all = pool(datasets);
    const double lf = estimate_smoothness(datasets, cfg);
    const double step = 1.0 / lf;
    ParameterVector w(cfg.dim, 0.0);
    for (int t = 0; t < max_iters; ++t) {
        const ParameterVector g = local_gradient(w, all, cfg);
        double gn = 0.0;
        for (double v : g) gn += v * v;
        if (std::sqrt(gn) <= tol) return w;
        for (int k = 0; k < cfg.dim; ++k) w[k] -= step * g[k];
    }
    throw std::runtime_error("reference_optimum: gradient tolerance not reached");
}

FederationTrace run_federation(const std::vector<Dataset>& datasets, const NoiseProfile& noise,
                               const FederationOptions& opts, const SvmConfig& cfg,
                               const LearningConfig& lcfg, std::uint64_t seed) {
    const std::size_t n = datasets.size();
    if (noise.size() != n) throw std::invalid_argument("run_federation: noise/client mismatch");
    if (opts.rule == AggregationRule::MlePresumed && opts.presumed_sigmas.size() != n)
        throw std::invalid_argument("run_federation: presumed sigmas missing");

    const Dataset all = pool(datasets);
    FederationTrace trace;
    trace.sigmas = noise.sigmas;
    trace.cumulative_prices.assign(n, 0.0);
    trace.rounds = lcfg.rounds;

    ParameterVector wbar(cfg.dim, 0.0);
    for (int t = 0; t < lcfg.rounds; ++t) {
        std::vector<ParameterVector> noisy(n);
        for (std::size_t i = 0; i < n; ++i) {
            ParameterVector w = wbar;
            for (int step = 0; step < opts.local_steps; ++step) {
                const ParameterVector g = local_gradient(w, datasets[i], cfg);
                for (int k = 0; k < cfg.dim; ++k) w[k] -= lcfg.step_size * g[k];
            }
            Rng rng(seed, /*stream=*/i + 2, /*substream=*/static_cast<std::uint64_t>(t));
            for (int k = 0; k < cfg.dim; ++k) w[k] += rng.gaussian(0.0, noise[i]);
            noisy[i] = std::move(w);
        }
        switch (opts.rule) {
            case AggregationRule::Mean: wbar = aggregate_mean(noisy); break;
            case AggregationRule::Mle: wbar = aggregate_mle(noisy, noise); break;
            case AggregationRule::MlePresumed:
                wbar = aggregate_mle(noisy, NoiseProfile(opts.presumed_sigmas));
                break;
        }
        if (opts.scheme) {
            RoundOutcome outcome;
            outcome.noisy_params = noisy;
            outcome.reports = opts.reports;
            apply_prices(outcome, *opts.scheme, opts.model);
            for (std::size_t i = 0; i < n; ++i) trace.cumulative_prices[i] += outcome.prices[i];
            trace.prices.push_back(std::move(outcome.prices));
        }
        const double loss = local_loss(wbar, all, cfg);
        trace.global_loss.push_back(loss);
        if (!(loss < opts.blowup_bound))
            throw solver_error("run_federation: loss blow-up at round " + std::to_string(t),
                               wbar, loss);
    }
    trace.final_w = wbar;
    return trace;
}

double empirical_loss_gap(const FederationTrace& trace, const ParameterVector& reference,
                          const std::vector<Dataset>& datasets, const SvmConfig& cfg) {
    const Dataset all = pool(datasets);
    const double gap = local_loss(trace.final_w, all, cfg) - local_loss(reference, all, cfg);
    if (gap < -1e-9)
        throw std::runtime_error("empirical_loss_gap: reference is not optimal");
    return gap;
}

std::string trace_to_csv(const FederationTrace& trace) {
    std::ostringstream os;
    os.precision(17);
    os << "round,client,sigma,price,global_loss\n";
    const std::size_t n = trace.sigmas.size();
    for (int t = 0; t < trace.rounds; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double price = trace.prices.empty() ? 0.0 : trace.prices[t][i];
            os << t << ',' << i << ',' << trace.sigmas[i] << ',' << price << ','
               << trace.global_loss[t] << "\n";
        }
    }
    double total_price = 0.0;
    for (double p : trace.cumulative_prices) total_price += p;
    os << "summary,-1," << n << ',' << total_price << ','
       << (trace.global_loss.empty() ? 0.0 : trace.global_loss.back()) << "\n";
    return os.str();
}

}  // namespace fedprice
