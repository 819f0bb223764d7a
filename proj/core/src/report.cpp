#include "kdetl/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kdetl/error.hpp"

namespace kdetl {

namespace fs = std::filesystem;

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::optional<double> metric_value(const ResultRow& r, const std::string& metric) {
    if (metric == "test_loglik") return r.test_loglik;
    if (metric == "wall_time_s") return r.wall_time_s;
    if (metric == "dhd") return r.dhd;
    if (metric == "shd") {
        if (r.shd) return static_cast<double>(*r.shd);
        return std::nullopt;
    }
    throw Error("unknown-metric", "unknown metric '" + metric + "'");
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

std::vector<std::string> ordered_unique(const std::vector<ResultRow>& rows, bool dataset) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        const auto& v = dataset ? r.dataset : r.algorithm;
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

}  // namespace

std::vector<Series> summarize(const std::vector<ResultRow>& rows, const std::string& dataset,
                              const std::string& metric) {
    std::vector<Series> out;
    for (const auto& alg : ordered_unique(rows, false)) {
        std::map<std::size_t, std::vector<double>> by_n;
        for (const auto& r : rows) {
            if (r.dataset != dataset || r.algorithm != alg) continue;
            if (auto v = metric_value(r, metric)) by_n[r.target_n].push_back(*v);
        }
        if (by_n.empty()) continue;
        Series s{alg, {}};
        for (const auto& [n, vals] : by_n) {
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            const double sd = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
            s.points.push_back({static_cast<double>(n), mean, sd});
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string render_svg(const std::vector<Series>& series, const std::string& title, const std::string& y_label) {
    constexpr double width = 720, height = 440, left = 80, right = 170, top = 40, bottom = 60;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.mean - p.sd);
            y1 = std::max(y1, p.mean + p.sd);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 1, x1 += 1;
    if (y1 == y0) y0 -= 1, y1 += 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = y0 + (y1 - y0) * i / 4.0;
        const double xv = x0 + (x1 - x0) * i / 4.0;
        out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(yv) << "\" y2=\"" << sy(yv)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
            << "</text>\n";
        out << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(xv)
            << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">target instances</text>\n";
    out << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        out << "<g class=\"series\">\n<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (const auto& p : s.points) out << sx(p.x) << ',' << sy(p.mean + p.sd) << ' ';
        for (auto it = s.points.rbegin(); it != s.points.rend(); ++it) out << sx(it->x) << ',' << sy(it->mean - it->sd) << ' ';
        out << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& p : s.points) out << sx(p.x) << ',' << sy(p.mean) << ' ';
        out << "\"/>\n";
        for (const auto& p : s.points) {
            out << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.mean) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        const double ly = top + 16 + 20.0 * static_cast<double>(k);
        out << "<line x1=\"" << left + pw + 16 << "\" x2=\"" << left + pw + 40 << "\" y1=\"" << ly << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text class=\"series-label\" x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
            << "</text>\n</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::vector<fs::path> plot_results(const std::vector<ResultRow>& rows, const fs::path& dir) {
    if (rows.empty()) throw Error("empty-results", "nothing to plot");
    fs::create_directories(dir);
    std::vector<fs::path> written;
    const std::vector<std::pair<std::string, std::string>> metrics{
        {"test_loglik", "test log-likelihood"}, {"dhd", "DHD"}, {"wall_time_s", "wall time (s)"}};
    for (const auto& ds : ordered_unique(rows, true)) {
        for (const auto& [metric, label] : metrics) {
            const auto series = summarize(rows, ds, metric);
            if (series.empty()) continue;
            const fs::path file = dir / (ds + "_" + metric + ".svg");
            std::ofstream out(file);
            out << render_svg(series, ds + ": " + label, label);
            if (!out) throw Error("write-failed", "cannot write " + file.string());
            written.push_back(file);
        }
    }
    return written;
}

std::vector<MetricReport> stats_report(const std::vector<ResultRow>& rows, std::size_t max_target_n, double alpha,
                                       const fs::path& dir) {
    const auto algorithms = ordered_unique(rows, false);
    if (algorithms.size() < 2) throw Error("insufficient-algorithms", "statistics need at least two algorithms");

    std::vector<MetricReport> out;
    const std::vector<std::pair<std::string, Direction>> metrics{{"dhd", Direction::lower_better},
                                                                 {"test_loglik", Direction::higher_better}};
    for (const auto& [metric, direction] : metrics) {
        using Block = std::tuple<std::string, std::size_t, std::uint64_t>;
        std::map<Block, std::map<std::string, double>> blocks;
        for (const auto& r : rows) {
            if (r.target_n >= max_target_n) continue;
            if (auto v = metric_value(r, metric)) blocks[{r.dataset, r.target_n, r.seed}][r.algorithm] = *v;
        }
        std::vector<std::vector<double>> complete;
        for (const auto& [key, vals] : blocks) {
            if (vals.size() != algorithms.size()) continue;
            std::vector<double> row;
            for (const auto& a : algorithms) row.push_back(vals.at(a));
            complete.push_back(std::move(row));
        }
        if (complete.size() < 2) {
            if (metric == "dhd") continue;  // no reference structure available
            throw Error("insufficient-blocks", "need at least two complete blocks with target_n < " +
                                                   std::to_string(max_target_n));
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(complete.size()), static_cast<Eigen::Index>(algorithms.size()));
        for (std::size_t b = 0; b < complete.size(); ++b) {
            for (std::size_t a = 0; a < algorithms.size(); ++a) {
                m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = complete[b][a];
            }
        }
        MetricReport rep;
        rep.metric = metric;
        rep.algorithms = algorithms;
        rep.blocks = complete.size();
        rep.friedman = friedman(m, direction);
        rep.posthoc = bergmann_hommel(rep.friedman.mean_ranks, rep.blocks, alpha);
        rep.groups = cd_groups(rep.friedman.mean_ranks, rep.posthoc);

        if (!dir.empty()) {
            fs::create_directories(dir);
            nlohmann::json j;
            j["metric"] = metric;
            j["direction"] = direction == Direction::lower_better ? "lower_better" : "higher_better";
            j["blocks"] = rep.blocks;
            j["max_target_n"] = max_target_n;
            j["alpha"] = alpha;
            j["friedman"] = {{"statistic", rep.friedman.statistic}, {"p_value", rep.friedman.p_value}};
            j["mean_ranks"] = nlohmann::json::object();
            for (std::size_t a = 0; a < algorithms.size(); ++a) {
                j["mean_ranks"][algorithms[a]] = rep.friedman.mean_ranks(static_cast<Eigen::Index>(a));
            }
            j["rejected"] = nlohmann::json::array();
            for (const auto& [x, y] : rep.posthoc.rejected) {
                j["rejected"].push_back({algorithms[static_cast<std::size_t>(x)], algorithms[static_cast<std::size_t>(y)]});
            }
            j["groups"] = nlohmann::json::array();
            for (const auto& g : rep.groups) {
                nlohmann::json members = nlohmann::json::array();
                for (int a : g) members.push_back(algorithms[static_cast<std::size_t>(a)]);
                j["groups"].push_back(members);
            }
            std::ofstream js(dir / ("stats_" + metric + ".json"));
            js << j.dump(2) << '\n';
            std::ofstream heat(dir / ("heatmap_" + metric + ".csv"));
            heat << "algorithm";
            for (const auto& a : algorithms) heat << ',' << a;
            heat << '\n' << std::setprecision(17);
            for (std::size_t i = 0; i < algorithms.size(); ++i) {
                heat << algorithms[i];
                for (std::size_t k = 0; k < algorithms.size(); ++k) {
                    heat << ',' << rep.posthoc.adjusted_p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
                }
                heat << '\n';
            }
            if (!js || !heat) throw Error("write-failed", "cannot write statistics under " + dir.string());
        }
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace kdetl
