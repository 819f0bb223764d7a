#include "kdetl/pc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

// Calls visit(subset) for every size-k subset of `items` in lexicographic
// order; stops early when visit returns true.
template <typename Visit>
bool for_each_subset(const std::vector<int>& items, std::size_t k, Visit visit) {
    if (k > items.size()) return false;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::vector<int> subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = items[idx[i]];
        if (visit(subset)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::vector<int> sorted_by_name(std::vector<int> v, const NodeSet& nodes) {
    std::sort(v.begin(), v.end(), [&](int a, int b) { return nodes.name_less(a, b); });
    return v;
}

std::vector<int> without(const std::vector<int>& v, int drop) {
    std::vector<int> out;
    for (int x : v) {
        if (x != drop) out.push_back(x);
    }
    return out;
}

struct Counter {
    CiTest& ci;
    std::size_t calls = 0;
    double operator()(int x, int y, std::span<const int> z) {
        ++calls;
        return ci.pvalue(x, y, z);
    }
};

void adjacency_phase(Counter& test, const PcConfig& cfg, Pdag& g, SepsetTable& sepsets) {
    const NodeSet& nodes = g.nodes();
    const int n = static_cast<int>(g.size());
    const auto order = sorted_by_name([&] {
        std::vector<int> all(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v) all[static_cast<std::size_t>(v)] = v;
        return all;
    }(), nodes);

    for (std::size_t level = 0;; ++level) {
        if (cfg.max_sepset_size && level > *cfg.max_sepset_size) break;
        std::vector<std::vector<int>> frozen(g.size());
        for (int v = 0; v < n; ++v) frozen[static_cast<std::size_t>(v)] = sorted_by_name(g.adjacents(v), nodes);

        bool any_candidate = false;
        std::vector<Edge> removals;
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                const int x = order[i];
                const int y = order[j];
                if (!g.adjacent(x, y)) continue;
                bool separated = false;
                for (const auto& [a, b] : {std::pair{x, y}, std::pair{y, x}}) {
                    const auto cand = without(frozen[static_cast<std::size_t>(a)], b);
                    if (cand.size() < level) continue;
                    any_candidate = true;
                    separated = for_each_subset(cand, level, [&](const std::vector<int>& s) {
                        if (test(x, y, s) >= cfg.alpha) {
                            sepsets.add(x, y, s);
                            return true;
                        }
                        return false;
                    });
                    if (separated) break;
                }
                if (separated) removals.push_back({std::min(x, y), std::max(x, y)});
            }
        }
        for (const auto& e : removals) g.remove(e.a, e.b);
        if (!any_candidate) break;
    }
}

// Collider decision for the unshielded triple x - y - z.
bool majority_collider(Counter& test, const PcConfig& cfg, const Pdag& skeleton, const SepsetTable& sepsets, int x,
                       int y, int z) {
    const NodeSet& nodes = skeleton.nodes();
    std::set<std::vector<int>> candidates;
    for (const auto& s : sepsets.get(x, z)) candidates.insert(s);
    for (const auto& [a, b] : {std::pair{x, z}, std::pair{z, x}}) {
        const auto pool = sorted_by_name(without(skeleton.adjacents(a), b), nodes);
        std::size_t top = pool.size();
        if (cfg.max_sepset_size) top = std::min(top, *cfg.max_sepset_size);
        for (std::size_t k = 0; k <= top; ++k) {
            for_each_subset(pool, k, [&](const std::vector<int>& s) {
                if (test(x, z, s) >= cfg.alpha) {
                    auto sorted = s;
                    std::sort(sorted.begin(), sorted.end());
                    candidates.insert(sorted);
                }
                return false;
            });
        }
    }
    std::size_t with_y = 0;
    for (const auto& s : candidates) {
        if (std::find(s.begin(), s.end(), y) != s.end()) ++with_y;
    }
    return 2 * with_y < candidates.size();
}

}  // namespace

PcResult pc_stable_run(CiTest& ci, const PcConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error("invalid-alpha", "alpha must lie in (0, 1)");
    const NodeSet& nodes = ci.nodes();
    Counter test{ci};
    PcResult out;
    Pdag g = Pdag::complete(nodes.names());
    adjacency_phase(test, cfg, g, out.sepsets);
    out.skeleton = g;

    struct Triple {
        int x, y, z;
    };
    std::vector<Triple> triples;
    const int n = static_cast<int>(g.size());
    for (int y = 0; y < n; ++y) {
        const auto adj = sorted_by_name(g.adjacents(y), nodes);
        for (std::size_t i = 0; i < adj.size(); ++i) {
            for (std::size_t j = i + 1; j < adj.size(); ++j) {
                if (!g.adjacent(adj[i], adj[j])) triples.push_back({adj[i], y, adj[j]});
            }
        }
    }
    std::sort(triples.begin(), triples.end(), [&](const Triple& a, const Triple& b) {
        if (a.y != b.y) return nodes.name_less(a.y, b.y);
        if (a.x != b.x) return nodes.name_less(a.x, b.x);
        return nodes.name_less(a.z, b.z);
    });

    Pdag oriented = g;
    for (const auto& t : triples) {
        if (!majority_collider(test, cfg, g, out.sepsets, t.x, t.y, t.z)) continue;
        // An arc already pointing the other way is a conflict; keep the earlier one.
        for (int p : {t.x, t.z}) {
            if (oriented.has_edge(p, t.y)) oriented.orient(p, t.y);
        }
    }
    apply_meek_rules(oriented);
    out.pdag = oriented;
    out.dag = extend_to_dag(oriented);
    out.num_tests = test.calls;
    return out;
}

Dag pc_stable(CiTest& ci, const PcConfig& cfg) { return pc_stable_run(ci, cfg).dag; }

Dag pc_stable(const Dataset& data, const PcConfig& cfg) {
    RcotTest ci(data, cfg.rcot);
    return pc_stable(ci, cfg);
}

PooledPValueTrace pool_pvalues(double target_p, const std::vector<double>& source_p,
                               const std::vector<double>& psi_weights, double eta, double alpha) {
    if (source_p.size() != psi_weights.size()) throw Error("dimension-mismatch", "one weight per source required");
    PooledPValueTrace out;
    out.target_p = target_p;
    out.source_p = source_p;
    out.weights.assign(source_p.size(), 0.0);
    const bool target_rejects = target_p < alpha;
    for (std::size_t s = 0; s < source_p.size(); ++s) {
        if (!(psi_weights[s] > 0.0) || std::isnan(source_p[s])) continue;
        const double local = ((source_p[s] < alpha) == target_rejects) ? 1.0 : 0.5;
        out.weights[s] = psi_weights[s] * local;
    }
    out.weights = normalize_weights(std::move(out.weights));
    double pooled_sources = 0.0;
    bool any = false;
    for (std::size_t s = 0; s < source_p.size(); ++s) {
        if (out.weights[s] > 0.0) {
            pooled_sources += out.weights[s] * source_p[s];
            any = true;
        }
    }
    out.pooled = any ? eta * target_p + (1.0 - eta) * pooled_sources : target_p;
    return out;
}

PooledCiTest::PooledCiTest(const TransferContext& ctx, const PcConfig& cfg)
    : ctx_(ctx), cfg_(cfg), nodes_(ctx.target().names()), target_(ctx.target(), nodes_, cfg.rcot) {
    for (const auto& s : ctx_.sources()) sources_.push_back(std::make_unique<RcotTest>(s, nodes_, cfg.rcot));
}

double PooledCiTest::pvalue(int x, int y, std::span<const int> z) { return query(x, y, z).pooled; }

PooledPValueTrace PooledCiTest::query(int x, int y, std::span<const int> z) {
    std::vector<int> zs(z.begin(), z.end());
    std::sort(zs.begin(), zs.end());
    auto key = std::make_tuple(std::min(x, y), std::max(x, y), zs);
    {
        std::lock_guard lock(mutex_);
        if (auto it = seen_.find(key); it != seen_.end()) return trace_[it->second];
    }
    const double pt = target_.pvalue(x, y, zs);
    std::vector<double> ps(sources_.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<int> vars = zs;
    vars.push_back(x);
    vars.push_back(y);
    const auto psi_w = ctx_.source_weights(vars);
    for (std::size_t s = 0; s < sources_.size(); ++s) {
        if (psi_w[s] > 0.0) ps[s] = sources_[s]->pvalue(x, y, zs);
    }
    PooledPValueTrace rec = pool_pvalues(pt, ps, psi_w, ctx_.eta(), cfg_.alpha);
    const bool swap = nodes_.name_less(y, x);
    rec.x = nodes_.name(swap ? y : x);
    rec.y = nodes_.name(swap ? x : y);
    for (int v : sorted_by_name(zs, nodes_)) rec.z.push_back(nodes_.name(v));
    std::lock_guard lock(mutex_);
    if (auto it = seen_.find(key); it != seen_.end()) return trace_[it->second];
    seen_.emplace(std::move(key), trace_.size());
    trace_.push_back(rec);
    return rec;
}

std::vector<PooledPValueTrace> PooledCiTest::trace() const {
    std::lock_guard lock(mutex_);
    return trace_;
}

Dag pcs_tl(const TransferContext& ctx, const PcConfig& cfg, std::vector<PooledPValueTrace>* trace) {
    if (!ctx.enabled()) return pc_stable(ctx.target(), cfg);
    PooledCiTest ci(ctx, cfg);
    Dag out = pc_stable(ci, cfg);
    if (trace) *trace = ci.trace();
    return out;
}

namespace {
std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + v[i];
    return out;
}
std::string join(const std::vector<double>& v) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ";" : "") << v[i];
    return out.str();
}
}  // namespace

void write_pvalue_trace(const std::vector<PooledPValueTrace>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write-failed", "cannot write " + path.string());
    out << "x,y,z,target_p,source_p,weights,pooled\n" << std::setprecision(17);
    for (const auto& t : trace) {
        out << t.x << ',' << t.y << ',' << join(t.z) << ',' << t.target_p << ',' << join(t.source_p) << ','
            << join(t.weights) << ',' << t.pooled << '\n';
    }
    if (!out) throw Error("write-failed", "cannot write " + path.string());
}

}  // namespace kdetl
