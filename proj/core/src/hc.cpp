#include "kdetl/hc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::string> names_of(const NodeSet& nodes, const std::vector<int>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (int v : idx) out.push_back(nodes.name(v));
    return out;
}

std::vector<int> with(std::vector<int> v, int x) {
    v.insert(std::upper_bound(v.begin(), v.end(), x), x);
    return v;
}

std::vector<int> without(std::vector<int> v, int x) {
    v.erase(std::find(v.begin(), v.end(), x));
    return v;
}

}  // namespace

FoldPlan hc_folds(std::size_t n, const HcConfig& cfg) { return kfold_indices(n, cfg.k_folds, cfg.seed.derive("folds")); }

CvScore::CvScore(const Dataset& data, FoldPlan folds)
    : data_(data), nodes_(data.names()), folds_(std::move(folds)) {
    for (std::size_t m = 0; m < folds_.k; ++m) training_.push_back(folds_.training_rows(m));
}

const std::vector<double>& CvScore::fold_terms(int node, const std::vector<int>& parents) {
    auto key = std::make_pair(node, parents);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto child = nodes_.name(node);
    const auto pnames = names_of(nodes_, parents);
    std::vector<double> terms(folds_.k, kNegInf);
    for (std::size_t m = 0; m < folds_.k; ++m) {
        if (training_[m].size() < parents.size() + 2) continue;
        try {
            const CkdeCpd cpd = CkdeCpd::fit(data_, child, pnames, training_[m]);
            terms[m] = cpd.logpdf(data_, folds_.folds[m]).sum();
        } catch (const Error& e) {
            if (e.code() != "singular-covariance" && e.code() != "insufficient-rows") throw;
        }
        if (std::isnan(terms[m])) terms[m] = kNegInf;
    }
    return cache_.emplace(std::move(key), std::move(terms)).first->second;
}

double CvScore::score(int node, const std::vector<int>& parents) {
    double total = 0.0;
    for (double t : fold_terms(node, parents)) total += t;
    return total;
}

CvTlScore::CvTlScore(const TransferContext& ctx, FoldPlan folds)
    : ctx_(ctx), target_(ctx.target(), folds), folds_(std::move(folds)) {}

void CvTlScore::clear() {
    target_.clear();
    cache_.clear();
    source_cache_.clear();
}

const Eigen::VectorXd& CvTlScore::source_rows(std::size_t source, int node, const std::vector<int>& parents) {
    auto key = std::make_tuple(source, node, parents);
    if (auto it = source_cache_.find(key); it != source_cache_.end()) return it->second;
    const auto& nodes = target_.nodes();
    Eigen::VectorXd ll;
    try {
        const CkdeCpd cpd = CkdeCpd::fit(ctx_.sources()[source], nodes.name(node), names_of(nodes, parents));
        ll = cpd.logpdf(ctx_.target());
    } catch (const Error& e) {
        if (e.code() != "singular-covariance" && e.code() != "insufficient-rows") throw;
        ll = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ctx_.target().rows()), kNegInf);
    }
    return source_cache_.emplace(std::move(key), std::move(ll)).first->second;
}

const CvTlDetail& CvTlScore::detail(int node, const std::vector<int>& parents) {
    auto key = std::make_pair(node, parents);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    CvTlDetail d;
    d.target_terms = target_.fold_terms(node, parents);
    for (double t : d.target_terms) d.target_total += t;
    d.score = d.target_total;
    d.source_terms.assign(folds_.k, 0.0);

    const double eta = ctx_.eta();
    if (ctx_.enabled() && eta < 1.0) {
        d.weights = ctx_.source_weights(with(parents, node));
        bool any = false;
        for (std::size_t s = 0; s < d.weights.size(); ++s) {
            if (!(d.weights[s] > 0.0)) continue;
            any = true;
            const auto& ll = source_rows(s, node, parents);
            for (std::size_t m = 0; m < folds_.k; ++m) {
                double fold_sum = 0.0;
                for (std::size_t r : folds_.folds[m]) fold_sum += ll(static_cast<Eigen::Index>(r));
                d.source_terms[m] += d.weights[s] * fold_sum;
            }
        }
        for (double s : d.source_terms) d.source_total += s;
        d.risk = std::abs(d.target_total) - std::abs(d.source_total);
        if (any && d.risk > 0.0 && std::isfinite(d.source_total)) {
            d.blended = true;
            d.score = 0.0;
            for (std::size_t m = 0; m < folds_.k; ++m) {
                d.score += eta * d.target_terms[m] + (1.0 - eta) * d.source_terms[m];
            }
        }
    } else {
        d.weights.assign(ctx_.num_sources(), 0.0);
    }
    return cache_.emplace(std::move(key), std::move(d)).first->second;
}

std::string CvTlScore::annotate(const Dag& g) {
    std::string out;
    for (int v = 0; v < static_cast<int>(g.size()); ++v) {
        if (detail(v, g.parents(v)).blended) out += (out.empty() ? "" : ";") + g.nodes().name(v);
    }
    return out;
}

double cv_score(const Dataset& data, const Dag& g, int node, const FoldPlan& folds) {
    const Dataset ordered = data.reorder(g.names());
    CvScore s(ordered, folds);
    return s.score(node, g.parents(node));
}

double cv_score(const Dataset& data, const Dag& g, const FoldPlan& folds) {
    const Dataset ordered = data.reorder(g.names());
    CvScore s(ordered, folds);
    double total = 0.0;
    for (int v = 0; v < static_cast<int>(g.size()); ++v) total += s.score(v, g.parents(v));
    return total;
}

double cvtl_score(const TransferContext& ctx, const Dag& g, int node, const FoldPlan& folds) {
    if (g.names() != ctx.target().names()) throw Error("variable-mismatch", "graph and context differ in variables");
    CvTlScore s(ctx, folds);
    return s.score(node, g.parents(node));
}

HcResult hill_climb(LocalScore& score, const Dag& start, const HcConfig& cfg) {
    if (!(start.nodes() == score.nodes())) throw Error("node-mismatch", "start graph and score disagree on nodes");
    const int n = static_cast<int>(start.size());
    const std::size_t cap = cfg.max_indegree.value_or(std::numeric_limits<std::size_t>::max());

    Dag g = start;
    std::vector<double> node_score(start.size());
    for (int v = 0; v < n; ++v) node_score[static_cast<std::size_t>(v)] = score.score(v, g.parents(v));
    auto total_of = [&] {
        double t = 0.0;
        for (double s : node_score) t += s;
        return t;
    };

    HcResult out;
    out.dag = g;
    out.score = total_of();
    out.start_score = out.score;
    std::deque<Move> tabu;
    std::size_t stale = 0;

    for (std::size_t iter = 1;; ++iter) {
        std::optional<Move> best;
        double best_delta = kNegInf;
        auto consider = [&](const Move& m, double delta) {
            if (std::isnan(delta) || delta == kNegInf) return;
            if (std::find(tabu.begin(), tabu.end(), m) != tabu.end()) return;
            if (!best || delta > best_delta) {
                best = m;
                best_delta = delta;
            }
        };
        // Enumeration order (kind, from, to) is the tie-break.
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (a == b || g.parents(b).size() >= cap || !g.can_add_arc(a, b)) continue;
                const auto ub = static_cast<std::size_t>(b);
                consider({MoveKind::add, a, b}, score.score(b, with(g.parents(b), a)) - node_score[ub]);
            }
        }
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (!g.has_arc(a, b)) continue;
                const auto ub = static_cast<std::size_t>(b);
                consider({MoveKind::remove, a, b}, score.score(b, without(g.parents(b), a)) - node_score[ub]);
            }
        }
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (!g.has_arc(a, b) || g.parents(a).size() >= cap) continue;
                Dag probe = g;
                probe.remove_arc(a, b);
                if (probe.has_path(a, b)) continue;
                const auto ua = static_cast<std::size_t>(a);
                const auto ub = static_cast<std::size_t>(b);
                const double delta = score.score(b, without(g.parents(b), a)) - node_score[ub] +
                                     score.score(a, with(g.parents(a), b)) - node_score[ua];
                consider({MoveKind::flip, a, b}, delta);
            }
        }
        if (!best) break;

        const Move m = *best;
        g = *mutate(g, m);
        for (int v : {m.from, m.to}) node_score[static_cast<std::size_t>(v)] = score.score(v, g.parents(v));
        const double total = total_of();

        HcStep step;
        step.iteration = iter;
        step.move = m;
        step.delta = best_delta;
        step.score = total;
        step.improved = total > out.score;
        step.note = score.annotate(g);
        out.trace.push_back(step);

        if (step.improved) {
            out.dag = g;
            out.score = total;
            stale = 0;
        } else {
            ++stale;
        }
        tabu.push_back(inverse(m));
        while (tabu.size() > cfg.tabu_size) tabu.pop_front();
        if (stale > cfg.patience) break;
    }
    return out;
}

HcResult hc_run(const Dataset& data, const HcConfig& cfg) {
    CvScore score(data, hc_folds(data.rows(), cfg));
    return hill_climb(score, Dag(data.names()), cfg);
}

Dag hc(const Dataset& data, const HcConfig& cfg) { return hc_run(data, cfg).dag; }

HcResult hc_tl_run(const TransferContext& ctx, const HcConfig& cfg) {
    if (!ctx.enabled()) return hc_run(ctx.target(), cfg);
    CvTlScore score(ctx, hc_folds(ctx.target().rows(), cfg));
    return hill_climb(score, Dag(ctx.target().names()), cfg);
}

Dag hc_tl(const TransferContext& ctx, const HcConfig& cfg) { return hc_tl_run(ctx, cfg).dag; }

void write_move_trace(const HcResult& result, const NodeSet& nodes, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write-failed", "cannot write " + path.string());
    out << "iteration,move,delta,score,improved,blended_nodes\n" << std::setprecision(17);
    for (const auto& s : result.trace) {
        out << s.iteration << ',' << to_string(s.move, nodes) << ',' << s.delta << ',' << s.score << ','
            << (s.improved ? 1 : 0) << ',' << s.note << '\n';
    }
    if (!out) throw Error("write-failed", "cannot write " + path.string());
}

}  // namespace kdetl
