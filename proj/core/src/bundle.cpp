#include <bit>
#include <cstdint>
#include <fstream>

#include "json.hpp"
#include "kdetl/error.hpp"
#include "kdetl/graph_io.hpp"
#include "kdetl/params.hpp"

namespace kdetl {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "bundle I/O assumes a little-endian host");

void put_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

struct CpdFiles {
    std::string training;
    std::string bandwidth;
    std::string marginal;
};

CpdFiles cpd_files(std::size_t i) {
    const auto stem = "cpd/" + std::to_string(i);
    return {stem + "_training.bin", stem + "_bandwidth.bin", stem + "_marginal.bin"};
}

nlohmann::json save_cpd(const CkdeCpd& cpd, std::size_t i, const fs::path& dir) {
    fs::create_directories(dir / "cpd");
    const auto files = cpd_files(i);
    write_matrix(cpd.joint().points(), dir / files.training);
    write_matrix(cpd.joint().bandwidth(), dir / files.bandwidth);
    nlohmann::json j{{"child", cpd.child()}, {"parents", cpd.parents()}, {"training", files.training},
                     {"bandwidth", files.bandwidth}};
    if (const auto* m = cpd.marginal()) {
        write_matrix(m->bandwidth(), dir / files.marginal);
        j["marginal"] = files.marginal;
    }
    return j;
}

CkdeCpd load_cpd(const nlohmann::json& j, const fs::path& dir) {
    const auto parents = j.at("parents").get<std::vector<std::string>>();
    const Eigen::MatrixXd training = read_matrix(dir / j.at("training").get<std::string>());
    const Eigen::MatrixXd bw = read_matrix(dir / j.at("bandwidth").get<std::string>());
    Eigen::MatrixXd marginal;
    if (!parents.empty()) marginal = read_matrix(dir / j.at("marginal").get<std::string>());
    return CkdeCpd(j.at("child").get<std::string>(), parents, training, bw, marginal);
}

}  // namespace

void write_matrix(const Eigen::MatrixXd& m, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write-failed", "cannot write " + path.string());
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!out) throw Error("write-failed", "cannot write " + path.string());
}

Eigen::MatrixXd read_matrix(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("unreadable-file", "cannot read " + path.string());
    const auto rows = get_u64(in);
    const auto cols = get_u64(in);
    if (!in || rows > (1ULL << 32) || cols > (1ULL << 20)) throw Error("malformed-bundle", "bad header in " + path.string());
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(static_cast<Eigen::Index>(rows),
                                                                              static_cast<Eigen::Index>(cols));
    in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!in) throw Error("malformed-bundle", "truncated matrix in " + path.string());
    return rm;
}

void save_bundle(const TlKdeBayesianNetwork& net, const fs::path& dir) {
    fs::create_directories(dir);
    write_dag(net.dag, dir / "graph.txt");
    nlohmann::json manifest;
    manifest["format"] = "kdetl-bundle-1";
    manifest["eta"] = net.eta;
    manifest["nodes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        const auto& node = net.nodes[i];
        nlohmann::json j = save_cpd(node.target, i, dir);
        j["sources"] = nlohmann::json::array();
        for (std::size_t k = 0; k < node.sources.size(); ++k) {
            const auto sub = dir / ("source_" + std::to_string(node.source_ids[k]));
            nlohmann::json s = save_cpd(node.sources[k], i, sub);
            s["source"] = node.source_ids[k];
            s["weight"] = node.weights[k];
            j["sources"].push_back(std::move(s));
        }
        manifest["nodes"].push_back(std::move(j));
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw Error("write-failed", "cannot write manifest in " + dir.string());
}

TlKdeBayesianNetwork load_bundle(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error("unreadable-file", "no manifest.json in " + dir.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed-bundle", e.what());
    }
    TlKdeBayesianNetwork net;
    net.dag = read_dag(dir / "graph.txt");
    try {
        net.eta = manifest.at("eta").get<double>();
        for (const auto& j : manifest.at("nodes")) {
            TlNodeCpd node{load_cpd(j, dir), {}, {}, {}};
            for (const auto& s : j.at("sources")) {
                const auto id = s.at("source").get<std::size_t>();
                node.source_ids.push_back(id);
                node.sources.push_back(load_cpd(s, dir / ("source_" + std::to_string(id))));
                node.weights.push_back(s.at("weight").get<double>());
            }
            net.nodes.push_back(std::move(node));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed-bundle", e.what());
    }
    if (net.nodes.size() != net.dag.size()) throw Error("malformed-bundle", "node count differs from graph");
    return net;
}

}  // namespace kdetl
