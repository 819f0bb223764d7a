#include "kdetl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

// Builder used for the code-defined networks. Parent names resolve against
// the node list.
class Spec {
  public:
    explicit Spec(std::vector<std::string> names) : names_(std::move(names)), eqs_(names_.size()) {}

    Spec& node(std::string_view name, std::vector<Component> comps) {
        eqs_[index(name)].components = std::move(comps);
        return *this;
    }
    int index(std::string_view name) const {
        return static_cast<int>(std::find(names_.begin(), names_.end(), name) - names_.begin());
    }
    StructuralNetwork build() const {
        StructuralNetwork net{Dag(names_), eqs_};
        for (int v = 0; v < static_cast<int>(names_.size()); ++v) {
            for (const auto& c : eqs_[static_cast<std::size_t>(v)].components) {
                for (const auto& t : c.terms) {
                    for (int p : t.parents) {
                        if (!net.dag.has_arc(p, v)) net.dag.add_arc(p, v);
                    }
                }
            }
        }
        net.validate();
        return net;
    }

  private:
    std::vector<std::string> names_;
    std::vector<NodeEquation> eqs_;
};

Component comp(double w, double icpt, std::vector<Term> terms, double sd) { return {w, icpt, std::move(terms), sd}; }

StructuralNetwork spbn1() {
    Spec s({"A", "B", "C", "D", "E", "F", "G"});
    auto t = [&](double c, std::initializer_list<const char*> ps) {
        Term term{c, {}};
        for (const char* p : ps) term.parents.push_back(s.index(p));
        return term;
    };
    s.node("A", {comp(1, 3, {}, 2)});
    s.node("B", {comp(1, 0, {t(0.5, {"A"})}, 2)});
    s.node("C", {comp(0.45, 0, {t(0.5, {"A"})}, 1.5), comp(0.55, 5, {}, 1)});
    s.node("D", {comp(0.5, 0, {t(0.5, {"C", "B"})}, 1), comp(0.5, 3.5, {}, 1)});
    s.node("E", {comp(0.5, 0, {t(1, {"D"}), t(1, {"C"})}, 1), comp(0.5, 2, {}, 1)});
    s.node("F", {comp(0.5, 0, {t(1, {"E"}), t(1, {"D"})}, 1), comp(0.5, 0, {t(0.7, {"A"})}, 0.5)});
    s.node("G", {comp(1, 0, {t(0.3, {"C"})}, 2)});
    return s.build();
}

StructuralNetwork spbn2() {
    Spec s({"A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M"});
    auto t = [&](double c, const char* p) { return Term{c, {s.index(p)}}; };
    s.node("A", {comp(1, 4, {}, 1.5)});
    s.node("B", {comp(0.4, 0, {t(1.2, "A")}, 1.1), comp(0.6, 1, {}, 1)});
    s.node("C", {comp(0.5, 1, {t(1, "A")}, 1.2), comp(0.5, 1, {}, 1)});
    s.node("D", {comp(1, 0, {t(0.8, "A")}, 1.3)});
    s.node("E", {comp(0.6, 0, {t(1.2, "C")}, 1.3), comp(0.4, -1, {}, 1.5)});
    s.node("H", {comp(0.6, 0, {t(2, "D")}, 1.2), comp(0.4, 0, {}, 1.8)});
    s.node("I", {comp(1, 0, {t(0.6, "B")}, 2)});
    s.node("J", {comp(1, 0, {t(0.7, "E")}, 1.7)});
    s.node("F", {comp(0.5, 0, {t(1.1, "C"), t(1, "H")}, 1), comp(0.5, 15, {}, 1.2)});
    s.node("G", {comp(0.5, 0, {t(0.8, "D"), t(1, "J")}, 1), comp(0.5, 0, {}, 1)});
    s.node("K", {comp(1, 0, {t(0.3, "F")}, 2)});
    s.node("L", {comp(0.5, 0, {t(1, "A"), t(1, "C"), t(1, "F")}, 1), comp(0.5, 0, {t(0.6, "H"), t(1, "D")}, 1.5)});
    s.node("M", {comp(0.4, 0, {t(1, "B"), t(1, "E"), t(1, "G")}, 1.2), comp(0.6, 0, {t(0.7, "J")}, 1.3)});
    return s.build();
}

StructuralNetwork spbn3() {
    Spec s({"A", "B", "C", "D", "E", "F", "G", "H"});
    auto t = [&](double c, const char* p) { return Term{c, {s.index(p)}}; };
    s.node("A", {comp(0.5, 4, {}, 2), comp(0.5, 1, {}, 1)});
    s.node("B", {comp(1, 0, {t(0.5, "A")}, 2)});
    s.node("C", {comp(1, 0, {t(2, "B")}, 1.5)});
    s.node("D", {comp(0.5, -1, {t(1, "B")}, 1), comp(0.5, 10, {}, 1.5)});
    s.node("E", {comp(0.5, 0, {t(2, "D")}, 1.5), comp(0.5, 3, {}, 1)});
    s.node("F", {comp(0.6, 0, {t(1.5, "D")}, 1.5), comp(0.4, 0, {}, 1)});
    s.node("G", {comp(1, 5, {t(0.3, "C")}, 1)});
    s.node("H", {comp(0.5, 0, {t(0.5, "C")}, 1), comp(0.5, 10, {}, 1)});
    return s.build();
}

StructuralNetwork spbn4() {
    Spec s({"A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N", "O"});
    auto t = [&](double c, const char* p) { return Term{c, {s.index(p)}}; };
    s.node("A", {comp(1, 5, {}, 2)});
    s.node("B", {comp(1, 2, {t(1, "A")}, 1.5)});
    s.node("C", {comp(0.4, 2, {t(1, "A")}, 1), comp(0.6, 1, {}, 1.5)});
    s.node("D", {comp(0.5, 0, {t(0.8, "B")}, 1.5), comp(0.5, 15, {}, 1.5)});
    s.node("E", {comp(1, 0, {t(0.7, "C")}, 2)});
    s.node("F", {comp(0.5, 0, {t(1.2, "C")}, 1.5), comp(0.5, -3, {}, 1)});
    s.node("G", {comp(0.6, 4, {t(1, "D")}, 1), comp(0.4, 8, {}, 1.5)});
    s.node("H", {comp(1, 0, {t(0.4, "D")}, 2)});
    s.node("K", {comp(1, 0, {t(0.5, "D")}, 2.5)});
    s.node("I", {comp(0.55, 0, {t(1.3, "E")}, 2), comp(0.45, 0, {}, 1)});
    s.node("J", {comp(1, 0, {t(0.5, "E")}, 2)});
    s.node("O", {comp(0.3, 1, {t(1, "F")}, 1.4), comp(0.7, -2, {}, 0.7)});
    s.node("M", {comp(0.6, 0, {t(1.5, "J")}, 1), comp(0.4, 7, {}, 1.5)});
    s.node("N", {comp(0.4, 0, {t(1.1, "J")}, 1.2), comp(0.6, -1, {}, 1.3)});
    s.node("L", {comp(0.5, 0, {t(0.3, "H")}, 1.1), comp(0.5, 5, {}, 1.4)});
    return s.build();
}

double component_mean(const Component& c, const Eigen::MatrixXd& values, Eigen::Index row) {
    double mu = c.intercept;
    for (const auto& t : c.terms) {
        double prod = t.coef;
        for (int p : t.parents) prod *= values(row, p);
        mu += prod;
    }
    return mu;
}

}  // namespace

void StructuralNetwork::validate() const {
    if (equations.size() != dag.size()) throw Error("invalid-network", "one equation per node required");
    for (int v = 0; v < static_cast<int>(dag.size()); ++v) {
        const auto& eq = equations[static_cast<std::size_t>(v)];
        const auto& name = dag.nodes().name(v);
        if (eq.components.empty()) throw Error("invalid-network", "node '" + name + "' has no components");
        double total = 0.0;
        for (const auto& c : eq.components) {
            if (!(c.weight > 0.0)) throw Error("invalid-network", "non-positive mixture weight at '" + name + "'");
            if (!(c.stddev > 0.0)) throw Error("invalid-network", "non-positive stddev at '" + name + "'");
            total += c.weight;
            for (const auto& t : c.terms) {
                for (int p : t.parents) {
                    if (!dag.has_arc(p, v)) {
                        throw Error("invalid-network", "term of '" + name + "' uses non-parent '" +
                                                           dag.nodes().name(p) + "'");
                    }
                }
            }
        }
        if (std::abs(total - 1.0) > 1e-9) throw Error("invalid-network", "mixture weights of '" + name + "' do not sum to 1");
    }
}

StructuralNetwork build_spbn(int id) {
    switch (id) {
        case 1: return spbn1();
        case 2: return spbn2();
        case 3: return spbn3();
        case 4: return spbn4();
        default: throw Error("invalid-network", "no synthetic network with id " + std::to_string(id));
    }
}

Dataset sample(const StructuralNetwork& net, std::size_t n, Seed seed) {
    if (n < 1) throw Error("invalid-count", "sample size must be positive");
    const auto rows = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd values(rows, static_cast<Eigen::Index>(net.dag.size()));
    for (int v : net.dag.topological_order()) {
        const auto& eq = net.equations[static_cast<std::size_t>(v)];
        Rng rng = make_rng(seed.derive(net.dag.nodes().name(v)));
        std::uniform_real_distribution<double> pick(0.0, 1.0);
        std::normal_distribution<double> normal;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double u = pick(rng);
            std::size_t k = 0;
            double acc = eq.components[0].weight;
            while (u >= acc && k + 1 < eq.components.size()) acc += eq.components[++k].weight;
            const auto& c = eq.components[k];
            values(r, v) = component_mean(c, values, r) + c.stddev * normal(rng);
        }
    }
    return Dataset(net.dag.names(), std::move(values));
}

StructuralNetwork modify_arcs(const StructuralNetwork& net, const CorruptionSpec& spec, ModificationLog* log) {
    if (!(spec.modified_fraction >= 0.0 && spec.modified_fraction <= 1.0)) {
        throw Error("invalid-fraction", "modified fraction must lie in [0, 1]");
    }
    StructuralNetwork out = net;
    auto arcs = net.dag.arcs();
    const auto k = static_cast<std::size_t>(
        std::ceil(spec.modified_fraction * static_cast<double>(arcs.size()) - 1e-9));
    if (k == 0) return out;

    Rng rng = make_rng(spec.seed.derive("modify-arcs"));
    std::shuffle(arcs.begin(), arcs.end(), rng);
    arcs.resize(k);
    std::uniform_real_distribution<double> coef(0.3, 1.5);
    const auto& names = net.dag.nodes();
    const int n = static_cast<int>(net.dag.size());

    for (const auto& arc : arcs) {
        auto& eq = out.equations[static_cast<std::size_t>(arc.child)];
        for (auto& c : eq.components) {
            std::erase_if(c.terms, [&](const Term& t) {
                return std::find(t.parents.begin(), t.parents.end(), arc.parent) != t.parents.end();
            });
        }
        out.dag.remove_arc(arc.parent, arc.child);
        if (log) log->removed.emplace_back(names.name(arc.parent), names.name(arc.child));

        std::vector<Arc> legal;
        for (int u = 0; u < n; ++u) {
            for (int v = 0; v < n; ++v) {
                if ((u == arc.parent && v == arc.child) || (u == arc.child && v == arc.parent)) continue;
                if (out.dag.can_add_arc(u, v)) legal.push_back({u, v});
            }
        }
        if (legal.empty()) {
            if (log) {
                log->messages.push_back("no legal relocation for " + names.name(arc.parent) + "->" +
                                        names.name(arc.child) + "; arc deleted");
            }
            continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
        const Arc fresh = legal[pick(rng)];
        out.dag.add_arc(fresh.parent, fresh.child);
        out.equations[static_cast<std::size_t>(fresh.child)].components.front().terms.push_back(
            Term{coef(rng), {fresh.parent}});
        if (log) log->added.emplace_back(names.name(fresh.parent), names.name(fresh.child));
    }
    out.validate();
    return out;
}

Dataset add_noise(const Dataset& data, const CorruptionSpec& spec) {
    if (spec.noise_std < 0.0) throw Error("invalid-noise", "noise standard deviation must be nonnegative");
    if (spec.noise_std == 0.0 && spec.noise_mean == 0.0) return data;
    Eigen::MatrixXd values = data.values();
    Rng rng = make_rng(spec.seed.derive("noise"));
    std::normal_distribution<double> normal(spec.noise_mean, spec.noise_std > 0.0 ? spec.noise_std : 1.0);
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        for (Eigen::Index r = 0; r < values.rows(); ++r) {
            values(r, c) += spec.noise_std > 0.0 ? normal(rng) : spec.noise_mean;
        }
    }
    return Dataset(data.names(), std::move(values));
}

}  // namespace kdetl
