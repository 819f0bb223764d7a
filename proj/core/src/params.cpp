#include "kdetl/params.hpp"

#include <cmath>
#include <random>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

std::vector<std::string> parent_names(const Dag& g, int v) {
    std::vector<std::string> out;
    for (int p : g.parents(v)) out.push_back(g.nodes().name(p));
    return out;
}

// Pooled log-density of arbitrary (child, parents...) blocks.
Eigen::VectorXd pooled(const TlNodeCpd& cpd, double eta, const Eigen::MatrixXd& block) {
    Eigen::VectorXd out = cpd.target.logpdf(block);
    if (cpd.sources.empty() || eta >= 1.0) return out;
    out *= eta;
    for (std::size_t s = 0; s < cpd.sources.size(); ++s) {
        if (cpd.weights[s] > 0.0) out += (1.0 - eta) * cpd.weights[s] * cpd.sources[s].logpdf(block);
    }
    return out;
}

}  // namespace

KdeBayesianNetwork fit_kdebn(const Dag& g, const Dataset& data) {
    KdeBayesianNetwork bn{g, {}};
    bn.cpds.reserve(g.size());
    for (int v = 0; v < static_cast<int>(g.size()); ++v) {
        bn.cpds.push_back(CkdeCpd::fit(data, g.nodes().name(v), parent_names(g, v)));
    }
    return bn;
}

TlKdeBayesianNetwork fit_tl_kdebn(const Dag& g, const TransferContext& ctx) {
    TlKdeBayesianNetwork net;
    net.dag = g;
    net.eta = ctx.enabled() ? ctx.eta() : 1.0;
    for (int v = 0; v < static_cast<int>(g.size()); ++v) {
        const auto& child = g.nodes().name(v);
        const auto parents = parent_names(g, v);
        TlNodeCpd node{CkdeCpd::fit(ctx.target(), child, parents), {}, {}, {}};
        if (ctx.enabled()) {
            std::vector<int> vars;
            vars.push_back(static_cast<int>(ctx.target().index_of(child)));
            for (const auto& p : parents) vars.push_back(static_cast<int>(ctx.target().index_of(p)));
            const auto w = ctx.source_weights(vars);
            for (std::size_t s = 0; s < w.size(); ++s) {
                if (!(w[s] > 0.0)) continue;
                node.source_ids.push_back(s);
                node.sources.push_back(CkdeCpd::fit(ctx.sources()[s], child, parents));
                node.weights.push_back(w[s]);
            }
        }
        net.nodes.push_back(std::move(node));
    }
    return net;
}

TlKdeBayesianNetwork as_tl(KdeBayesianNetwork bn) {
    TlKdeBayesianNetwork net;
    net.dag = std::move(bn.dag);
    for (auto& c : bn.cpds) net.nodes.push_back({std::move(c), {}, {}, {}});
    return net;
}

Eigen::VectorXd tl_node_logpdf(const TlKdeBayesianNetwork& net, int node, const Dataset& data,
                               const TlEvalOptions& opts) {
    const auto& cpd = net.nodes.at(static_cast<std::size_t>(node));
    const Eigen::MatrixXd block = data.gather(family_columns(data, cpd.target.child(), cpd.target.parents()));
    Eigen::VectorXd out = pooled(cpd, net.eta, block);
    if (!opts.normalize || cpd.sources.empty() || net.eta >= 1.0) return out;

    const Eigen::VectorXd train = cpd.target.joint().points().col(0);
    const double pad = 8.0 * std::sqrt(cpd.target.joint().bandwidth()(0, 0));
    const double lo = train.minCoeff() - pad;
    const double hi = train.maxCoeff() + pad;
    const auto s = static_cast<Eigen::Index>(opts.mc_samples);
    Rng rng = make_rng(opts.seed.derive(cpd.target.child()));
    std::uniform_real_distribution<double> uniform(lo, hi);
    Eigen::VectorXd draws(s);
    for (Eigen::Index i = 0; i < s; ++i) draws(i) = uniform(rng);
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
        Eigen::MatrixXd probe(s, block.cols());
        probe.col(0) = draws;
        for (Eigen::Index c = 1; c < block.cols(); ++c) probe.col(c).setConstant(block(r, c));
        const Eigen::VectorXd lp = pooled(cpd, net.eta, probe);
        const double top = lp.maxCoeff();
        const double log_z = top + std::log((lp.array() - top).exp().mean() * (hi - lo));
        out(r) -= log_z;
    }
    return out;
}

Eigen::VectorXd tl_logpdf(const TlKdeBayesianNetwork& net, const Dataset& data, const TlEvalOptions& opts) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.rows()));
    for (int v = 0; v < static_cast<int>(net.nodes.size()); ++v) out += tl_node_logpdf(net, v, data, opts);
    return out;
}

double tl_loglik(const TlKdeBayesianNetwork& net, const Dataset& data, const TlEvalOptions& opts) {
    return tl_logpdf(net, data, opts).sum();
}

}  // namespace kdetl
