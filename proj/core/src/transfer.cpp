#include "kdetl/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kdetl/error.hpp"
#include "kdetl/kde.hpp"
#include "kdetl/parallel.hpp"

namespace kdetl {

namespace {

constexpr int kGridPoints = 512;

Eigen::VectorXd linspace(double lo, double hi) {
    return Eigen::VectorXd::LinSpaced(kGridPoints, lo, hi);
}

}  // namespace

double js_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() < 2 || q.size() < 2) throw Error("insufficient-rows", "JS divergence needs two samples per side");
    const KdeModel kp = KdeModel::fit(p);
    const KdeModel kq = KdeModel::fit(q);
    const double pad = 3.0 * std::sqrt(std::max(kp.bandwidth()(0, 0), kq.bandwidth()(0, 0)));

    std::vector<double> grid;
    grid.reserve(2 * kGridPoints);
    for (const Eigen::VectorXd* s : {&p, &q}) {
        const Eigen::VectorXd g = linspace(s->minCoeff() - pad, s->maxCoeff() + pad);
        grid.insert(grid.end(), g.begin(), g.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const Eigen::Map<const Eigen::VectorXd> x(grid.data(), static_cast<Eigen::Index>(grid.size()));

    const Eigen::VectorXd lp = kp.logpdf(x);
    const Eigen::VectorXd lq = kq.logpdf(x);
    Eigen::VectorXd f(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double top = std::max(lp(i), lq(i));
        const double lm = top + std::log(0.5 * (std::exp(lp(i) - top) + std::exp(lq(i) - top)));
        f(i) = 0.5 * std::exp(lp(i)) * (lp(i) - lm) + 0.5 * std::exp(lq(i)) * (lq(i) - lm);
    }
    double js = 0.0;
    for (Eigen::Index i = 1; i < x.size(); ++i) js += 0.5 * (f(i) + f(i - 1)) * (x(i) - x(i - 1));
    return std::clamp(js, 0.0, std::numbers::ln2);
}

double quantile_type7(std::vector<double> values, double prob) {
    if (values.empty()) throw Error("empty-input", "quantile of an empty list");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> psi(const std::vector<double>& values) {
    if (values.empty()) return {};
    const double q1 = quantile_type7(values, 0.25);
    const double q3 = quantile_type7(values, 0.75);
    const double fence = q3 + 1.5 * (q3 - q1);
    std::vector<double> out;
    out.reserve(values.size());
    for (double u : values) {
        if (u > fence) {
            out.push_back(0.0);
        } else {
            out.push_back(u > 0.0 ? std::min(1.0 / u, kPsiCap) : kPsiCap);
        }
    }
    return out;
}

std::vector<double> normalize_weights(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total > 0.0) {
        for (double& w : weights) w /= total;
    }
    return weights;
}

TransferContext TransferContext::build(Dataset target, std::vector<Dataset> sources) {
    for (auto& s : sources) s = s.reorder(target.names());
    const auto n_vars = target.cols();
    Eigen::MatrixXd js(static_cast<Eigen::Index>(sources.size()), static_cast<Eigen::Index>(n_vars));
    parallel_for(sources.size() * n_vars, [&](std::size_t k) {
        const std::size_t s = k / n_vars;
        const std::size_t v = k % n_vars;
        js(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(v)) =
            js_divergence(target.column(v), sources[s].column(v));
    });
    return TransferContext(std::move(target), std::move(sources), std::move(js));
}

TransferContext::TransferContext(Dataset target, std::vector<Dataset> sources, Eigen::MatrixXd per_variable_js)
    : target_(std::move(target)), sources_(std::move(sources)), js_(std::move(per_variable_js)) {
    for (auto& s : sources_) {
        if (s.names() != target_.names()) s = s.reorder(target_.names());
    }
    if (js_.rows() != static_cast<Eigen::Index>(sources_.size()) ||
        js_.cols() != static_cast<Eigen::Index>(target_.cols())) {
        throw Error("dimension-mismatch", "JS matrix shape does not match sources x variables");
    }
    finalize();
}

void TransferContext::finalize() {
    kept_.clear();
    eta_ = 1.0;
    if (sources_.empty()) return;
    std::vector<double> global;
    for (Eigen::Index s = 0; s < js_.rows(); ++s) global.push_back(js_.row(s).sum());
    const auto g = psi(global);
    double mean_n = 0.0;
    for (std::size_t s = 0; s < g.size(); ++s) {
        if (g[s] > 0.0) {
            kept_.push_back(s);
            mean_n += static_cast<double>(sources_[s].rows());
        }
    }
    if (kept_.empty()) return;
    mean_n /= static_cast<double>(kept_.size());
    eta_ = std::min(1.0, static_cast<double>(target_.rows()) / mean_n);
}

double TransferContext::sjs(std::size_t source, std::span<const int> vars) const {
    if (source >= sources_.size()) throw Error("unknown-source", "source index out of range");
    double total = 0.0;
    for (int v : vars) {
        if (v < 0 || v >= js_.cols()) throw Error("unknown-variable", "variable index out of range");
        total += js_(static_cast<Eigen::Index>(source), v);
    }
    return total;
}

double TransferContext::sjs(std::size_t source, const std::vector<std::string>& vars) const {
    std::vector<int> idx;
    for (const auto& v : vars) idx.push_back(static_cast<int>(target_.index_of(v)));
    return sjs(source, idx);
}

TransferContext TransferContext::with_eta(double eta) const {
    TransferContext copy = *this;
    copy.eta_ = std::clamp(eta, std::numeric_limits<double>::min(), 1.0);
    return copy;
}

std::vector<double> TransferContext::source_weights(std::span<const int> vars) const {
    std::vector<double> out(sources_.size(), 0.0);
    if (kept_.empty()) return out;
    std::vector<double> u;
    for (std::size_t s : kept_) u.push_back(sjs(s, vars));
    const auto w = normalize_weights(psi(u));
    for (std::size_t i = 0; i < kept_.size(); ++i) out[kept_[i]] = w[i];
    return out;
}

}  // namespace kdetl
