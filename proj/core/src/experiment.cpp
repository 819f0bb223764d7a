#include "kdetl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "kdetl/error.hpp"
#include "kdetl/graph_io.hpp"
#include "kdetl/hc.hpp"
#include "kdetl/kde.hpp"
#include "kdetl/parallel.hpp"
#include "kdetl/params.hpp"
#include "kdetl/pc.hpp"
#include "kdetl/transfer.hpp"

namespace kdetl {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw Error("invalid-config", "bad value '" + value + "' for key '" + key + "'");
}

std::size_t to_count(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v);
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
    return out;
}

std::optional<std::size_t> to_cap(const std::string& key, const std::string& v) {
    if (v == "none" || v == "unlimited") return std::nullopt;
    return to_count(key, v);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v);
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "network") {
        const auto colon = value.find(':');
        if (colon == std::string::npos) bad_value(key, value);
        const auto kind = value.substr(0, colon);
        const auto arg = value.substr(colon + 1);
        if (kind == "spbn") {
            cfg.network_kind = NetworkKind::spbn;
            cfg.spbn_id = static_cast<int>(to_count(key, arg));
        } else if (kind == "lgbn") {
            cfg.network_kind = NetworkKind::lgbn;
            cfg.network_path = arg;
        } else if (kind == "csv") {
            cfg.network_kind = NetworkKind::csv;
            cfg.network_path = arg;
        } else {
            bad_value(key, value);
        }
    } else if (key == "dataset") {
        cfg.dataset = value;
    } else if (key == "sources") {
        cfg.sources.clear();
        for (const auto& s : split_list(value)) cfg.sources.push_back(to_real(key, s));
    } else if (key == "source_kind") {
        if (value == "network") {
            cfg.source_kind = SourceKind::network;
        } else if (value == "noise") {
            cfg.source_kind = SourceKind::noise;
        } else {
            bad_value(key, value);
        }
    } else if (key == "sources_csv") {
        cfg.sources_csv.clear();
        for (const auto& s : split_list(value)) cfg.sources_csv.emplace_back(s);
    } else if (key == "source_n") {
        cfg.source_n = to_count(key, value);
    } else if (key == "noise_mean") {
        cfg.noise_mean = to_real(key, value);
    } else if (key == "noise_std") {
        cfg.noise_std = to_real(key, value);
    } else if (key == "noise_source_std") {
        cfg.noise_source_std = to_real(key, value);
    } else if (key == "grid_start") {
        cfg.grid_start = to_count(key, value);
    } else if (key == "grid_step") {
        cfg.grid_step = to_count(key, value);
    } else if (key == "grid_end") {
        cfg.grid_end = to_count(key, value);
    } else if (key == "test_n") {
        cfg.test_n = to_count(key, value);
    } else if (key == "repeats") {
        cfg.repeats = to_count(key, value);
    } else if (key == "algorithms") {
        cfg.algorithms = split_list(value);
    } else if (key == "seed") {
        cfg.seed = to_count(key, value);
    } else if (key == "output") {
        cfg.output = value;
    } else if (key == "alpha") {
        cfg.alpha = to_real(key, value);
    } else if (key == "max_sepset_size") {
        cfg.max_sepset_size = to_cap(key, value);
    } else if (key == "k_folds") {
        cfg.k_folds = to_count(key, value);
    } else if (key == "patience") {
        cfg.patience = to_count(key, value);
    } else if (key == "max_indegree") {
        cfg.max_indegree = to_cap(key, value);
    } else if (key == "reference_n") {
        cfg.reference_n = to_count(key, value);
    } else if (key == "write_structures") {
        cfg.write_structures = to_bool(key, value);
    } else {
        throw Error("unknown-config-key", "unknown key '" + key + "'");
    }
}

std::string dataset_id(const ExperimentConfig& cfg) {
    if (!cfg.dataset.empty()) return cfg.dataset;
    if (cfg.network_kind == NetworkKind::spbn) return "spbn" + std::to_string(cfg.spbn_id);
    return cfg.network_path.stem().string();
}

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Repeat {
    std::uint64_t seed_value = 0;
    Dataset pool;
    Dataset test;
    std::vector<Dataset> sources;
};

Dataset noise_table(const std::vector<std::string>& names, std::size_t rows, double sd, Seed seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()));
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        for (Eigen::Index r = 0; r < values.rows(); ++r) values(r, c) = normal(rng);
    }
    return Dataset(names, std::move(values));
}

Repeat make_repeat(const ExperimentConfig& cfg, const StructuralNetwork* net, const Dataset* csv,
                   const std::vector<Dataset>& csv_sources, std::size_t r) {
    const Seed seed = Seed{cfg.seed}.derive("repeat", r);
    const auto pool_n = grid_points(cfg).back();
    if (net) {
        Repeat rep{seed.value, sample(*net, pool_n, seed.derive("target")), sample(*net, cfg.test_n, seed.derive("test")),
                   {}};
        for (std::size_t s = 0; s < cfg.sources.size(); ++s) {
            if (cfg.source_kind == SourceKind::noise) {
                rep.sources.push_back(noise_table(net->dag.names(), cfg.source_n, cfg.noise_source_std,
                                                  seed.derive("noise-source", s)));
                continue;
            }
            const CorruptionSpec mod{cfg.sources[s], cfg.noise_mean, cfg.noise_std, seed.derive("source", s)};
            const auto modified = modify_arcs(*net, mod);
            Dataset data = sample(modified, cfg.source_n, seed.derive("source-sample", s));
            rep.sources.push_back(add_noise(data, mod));
        }
        return rep;
    }
    auto [train, test] = holdout_split(*csv, cfg.test_n, seed.derive("holdout"));
    Repeat rep{seed.value, std::move(train), std::move(test), {}};
    if (cfg.source_kind == SourceKind::noise) {
        for (std::size_t s = 0; s < cfg.sources.size(); ++s) {
            rep.sources.push_back(
                noise_table(csv->names(), cfg.source_n, cfg.noise_source_std, seed.derive("noise-source", s)));
        }
    } else {
        rep.sources = csv_sources;
    }
    return rep;
}

struct Cell {
    std::size_t repeat = 0;
    std::size_t target_n = 0;
};

struct CellResult {
    std::vector<ResultRow> rows;
    std::vector<Dag> graphs;  // aligned with cfg.algorithms
};

PcConfig pc_config(const ExperimentConfig& cfg, Seed seed) {
    PcConfig pc;
    pc.alpha = cfg.alpha;
    pc.max_sepset_size = cfg.max_sepset_size;
    pc.rcot.seed = seed;
    return pc;
}

HcConfig hc_config(const ExperimentConfig& cfg, Seed seed) {
    HcConfig hc;
    hc.k_folds = cfg.k_folds;
    hc.patience = cfg.patience;
    hc.max_indegree = cfg.max_indegree;
    hc.seed = seed;
    return hc;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (grid_step == 0 || grid_start == 0 || grid_start > grid_end) {
        throw Error("invalid-config", "grid needs 0 < start <= end and step > 0");
    }
    if (repeats < 1) throw Error("invalid-config", "repeats must be at least 1");
    if (algorithms.empty()) throw Error("invalid-config", "no algorithms selected");
    for (const auto& a : algorithms) {
        if (a != "pc" && a != "pcs-tl" && a != "hc" && a != "hc-tl") {
            throw Error("invalid-config", "unknown algorithm '" + a + "'");
        }
    }
    for (double f : sources) {
        if (!(f >= 0.0 && f <= 1.0)) throw Error("invalid-config", "source fractions must lie in [0, 1]");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("invalid-config", "alpha must lie in (0, 1)");
    if (k_folds < 2) throw Error("invalid-config", "k_folds must be at least 2");
    if (test_n < 1) throw Error("invalid-config", "test_n must be positive");
    if (noise_std < 0.0 || noise_source_std <= 0.0) throw Error("invalid-config", "noise deviations must be positive");
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error("invalid-config", "line " + std::to_string(number) + ": expected key = value");
        }
        set_key(cfg, trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("unreadable-file", "cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw Error("invalid-config", "override must be key=value");
    set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
    cfg.validate();
}

std::vector<std::size_t> grid_points(const ExperimentConfig& cfg) {
    std::vector<std::size_t> out;
    for (std::size_t n = cfg.grid_start; n <= cfg.grid_end; n += cfg.grid_step) out.push_back(n);
    return out;
}

bool is_transfer_algorithm(std::string_view algorithm) { return algorithm == "pcs-tl" || algorithm == "hc-tl"; }
bool is_pc_family(std::string_view algorithm) { return algorithm == "pc" || algorithm == "pcs-tl"; }

std::string format_results(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.dataset << ',' << r.algorithm << ',' << r.target_n << ',' << r.seed << ',' << fmt(r.test_loglik)
            << ',';
        if (r.shd) out << *r.shd;
        out << ',';
        if (r.dhd) out << fmt(*r.dhd);
        out << ',' << std::fixed << std::setprecision(6) << r.wall_time_s << std::defaultfloat << '\n';
    }
    return out.str();
}

std::vector<ResultRow> parse_results(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || trim(line) != kResultsHeader) {
        throw Error("malformed-results", "results CSV must start with the header '" + std::string(kResultsHeader) + "'");
    }
    std::vector<ResultRow> rows;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(trim(line));
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() == 7) f.emplace_back();
        if (f.size() != 8) throw Error("malformed-results", "line " + std::to_string(number) + ": expected 8 fields");
        try {
            ResultRow r;
            r.dataset = f[0];
            r.algorithm = f[1];
            r.target_n = to_count("target_n", f[2]);
            r.seed = to_count("seed", f[3]);
            r.test_loglik = to_real("test_loglik", f[4]);
            if (!f[5].empty()) r.shd = to_count("shd", f[5]);
            if (!f[6].empty()) r.dhd = to_real("dhd", f[6]);
            r.wall_time_s = f[7].empty() ? 0.0 : to_real("wall_time_s", f[7]);
            rows.push_back(std::move(r));
        } catch (const Error& e) {
            throw Error("malformed-results", "line " + std::to_string(number) + ": " + e.what());
        }
    }
    return rows;
}

void write_results(const std::vector<ResultRow>& rows, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write-failed", "cannot write " + path.string());
    out << format_results(rows);
    if (!out) throw Error("write-failed", "cannot write " + path.string());
}

std::vector<ResultRow> read_results(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("unreadable-file", "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto rows = parse_results(buf.str());
    if (rows.empty()) throw Error("empty-results", "results CSV has no rows");
    return rows;
}

StructuralNetwork config_network(const ExperimentConfig& cfg) {
    switch (cfg.network_kind) {
        case NetworkKind::spbn: return build_spbn(cfg.spbn_id);
        case NetworkKind::lgbn: return load_lgbn(cfg.network_path);
        case NetworkKind::csv: break;
    }
    throw Error("invalid-config", "CSV experiments have no generating network");
}

Dag consensus_graph(const std::vector<Dag>& graphs) {
    if (graphs.empty()) throw Error("empty-input", "consensus of zero graphs");
    std::map<Arc, std::size_t> count;
    for (const auto& g : graphs) {
        if (!(g.nodes() == graphs.front().nodes())) throw Error("node-mismatch", "graphs differ in nodes");
        for (const auto& a : g.arcs()) ++count[a];
    }
    std::vector<std::pair<std::size_t, Arc>> ranked;
    for (const auto& [a, c] : count) {
        if (2 * c > graphs.size()) ranked.emplace_back(c, a);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    Dag out(graphs.front().nodes());
    for (const auto& [c, a] : ranked) {
        if (out.can_add_arc(a.parent, a.child)) out.add_arc(a.parent, a.child);
    }
    return out;
}

Dag reference_structure(const ExperimentConfig& cfg, std::string_view family, const ProgressFn& progress) {
    if (family != "pc" && family != "hc") throw Error("invalid-family", "reference family must be pc or hc");
    if (cfg.network_kind != NetworkKind::csv) return config_network(cfg).dag;

    const Dataset data = load_csv(cfg.network_path);
    const fs::path cache = cfg.output / ("reference_" + std::string(family) + ".txt");
    if (fs::exists(cache)) {
        Dag cached = read_dag(cache);
        if (cached.names() == data.names()) return cached;
    }
    if (data.rows() < 2 * cfg.test_n && progress) {
        progress("warning: only " + std::to_string(data.rows()) + " rows for the reference structure");
    }
    const Dataset ref = data.head(std::min(cfg.reference_n, data.rows()));
    const Seed seed = Seed{cfg.seed}.derive("reference");
    Dag g = family == "pc" ? pc_stable(ref, pc_config(cfg, seed.derive("rcot"))) : hc(ref, hc_config(cfg, seed.derive("hc")));
    fs::create_directories(cfg.output);
    write_dag(g, cache);
    return g;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    const auto grid = grid_points(cfg);
    const std::string id = dataset_id(cfg);
    const bool any_tl = std::any_of(cfg.algorithms.begin(), cfg.algorithms.end(),
                                    [](const std::string& a) { return is_transfer_algorithm(a); });

    std::optional<StructuralNetwork> net;
    std::optional<Dataset> csv;
    std::vector<Dataset> csv_sources;
    std::optional<Dag> ref_pc;
    std::optional<Dag> ref_hc;
    if (cfg.network_kind == NetworkKind::csv) {
        csv = load_csv(cfg.network_path);
        if (cfg.source_kind == SourceKind::network) {
            for (const auto& p : cfg.sources_csv) csv_sources.push_back(load_csv(p).reorder(csv->names()));
        }
        if (cfg.test_n >= csv->rows()) throw Error("invalid-config", "test_n must be smaller than the CSV");
        const auto has = [&](bool pc_family) {
            return std::any_of(cfg.algorithms.begin(), cfg.algorithms.end(),
                               [&](const std::string& a) { return is_pc_family(a) == pc_family; });
        };
        if (has(true)) ref_pc = reference_structure(cfg, "pc", progress);
        if (has(false)) ref_hc = reference_structure(cfg, "hc", progress);
    } else {
        net = config_network(cfg);
        ref_pc = ref_hc = net->dag;
    }

    std::vector<Repeat> repeats;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        repeats.push_back(make_repeat(cfg, net ? &*net : nullptr, csv ? &*csv : nullptr, csv_sources, r));
    }

    std::vector<Cell> cells;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        for (std::size_t n : grid) {
            if (n > repeats[r].pool.rows()) {
                if (progress) progress("warning: skipping target_n=" + std::to_string(n) + " (pool too small)");
                continue;
            }
            cells.push_back({r, n});
        }
    }

    std::vector<CellResult> results(cells.size());
    parallel_for(cells.size(), [&](std::size_t c) {
        const auto& cell = cells[c];
        const auto& rep = repeats[cell.repeat];
        const Dataset target = rep.pool.head(cell.target_n);
        const Seed seed = Seed{rep.seed_value}.derive("cell", cell.target_n);

        std::optional<TransferContext> ctx;
        double ctx_time = 0.0;
        if (any_tl && !rep.sources.empty()) {
            const auto t0 = std::chrono::steady_clock::now();
            ctx = TransferContext::build(target, rep.sources);
            ctx_time = seconds_since(t0);
        }
        auto& out = results[c];
        for (const auto& alg : cfg.algorithms) {
            const auto t0 = std::chrono::steady_clock::now();
            const bool tl = is_transfer_algorithm(alg) && ctx.has_value();
            Dag g;
            if (is_pc_family(alg)) {
                const auto pc = pc_config(cfg, seed.derive("rcot"));
                g = tl ? pcs_tl(*ctx, pc) : pc_stable(target, pc);
            } else {
                const auto hcfg = hc_config(cfg, seed.derive("hc"));
                g = tl ? hc_tl(*ctx, hcfg) : hc(target, hcfg);
            }
            double ll = 0.0;
            if (tl) {
                ll = tl_loglik(fit_tl_kdebn(g, *ctx), rep.test);
            } else {
                ll = network_loglik(fit_kdebn(g, target), rep.test);
            }
            ResultRow row;
            row.dataset = id;
            row.algorithm = alg;
            row.target_n = cell.target_n;
            row.seed = rep.seed_value;
            row.test_loglik = ll;
            const auto& ref = is_pc_family(alg) ? ref_pc : ref_hc;
            if (ref) {
                const Dag aligned = [&] {
                    Dag a(ref->nodes());
                    for (const auto& arc : g.arcs()) a.add_arc(g.nodes().name(arc.parent), g.nodes().name(arc.child));
                    return a;
                }();
                row.shd = shd(*ref, aligned);
                row.dhd = dhd(*ref, aligned);
            }
            row.wall_time_s = seconds_since(t0) + (tl ? ctx_time : 0.0);
            out.rows.push_back(std::move(row));
            out.graphs.push_back(std::move(g));
        }
        if (progress) {
            progress("done repeat " + std::to_string(cell.repeat) + " target_n=" + std::to_string(cell.target_n));
        }
    });

    ExperimentOutput out;
    for (const auto& r : results) out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    fs::create_directories(cfg.output);
    out.results_csv = cfg.output / "results.csv";
    write_results(out.rows, out.results_csv);

    if (cfg.write_structures) {
        const fs::path dir = cfg.output / "structures";
        fs::create_directories(dir);
        for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
            for (std::size_t n : grid) {
                std::vector<Dag> per_seed;
                for (std::size_t c = 0; c < cells.size(); ++c) {
                    if (cells[c].target_n != n) continue;
                    const auto& g = results[c].graphs[a];
                    write_dag(g, dir / (id + "_" + cfg.algorithms[a] + "_n" + std::to_string(n) + "_r" +
                                        std::to_string(cells[c].repeat) + ".txt"));
                    per_seed.push_back(g);
                }
                if (!per_seed.empty()) {
                    write_dag(consensus_graph(per_seed),
                              dir / (id + "_" + cfg.algorithms[a] + "_n" + std::to_string(n) + "_consensus.txt"));
                }
            }
        }
    }
    return out;
}

}  // namespace kdetl
