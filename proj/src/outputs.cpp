#include "crn/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "crn/config.hpp"

namespace crn::sim {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write output file: " + p.string());
    return f;
}

// minimal SVG scatter/line chart, enough to eyeball the figure data
void write_svg_scatter(const fs::path& path, const std::string& title,
                       const std::vector<std::pair<double, double>>& pts, bool connect) {
    if (pts.empty()) return;
    double xmin = pts[0].first, xmax = pts[0].first, ymin = pts[0].second, ymax = pts[0].second;
    for (const auto& [x, y] : pts) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    const double W = 640, H = 420, L = 60, B = 40;
    auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - 20); };
    auto sy = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - B - 30); };

    auto f = open_out(path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << W / 2 << "' y='18' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";
    f << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - 20 << "' y2='" << H - B
      << "' stroke='black'/>\n";
    f << "<line x1='" << L << "' y1='" << H - B << "' x2='" << L << "' y2='30' stroke='black'/>\n";
    f << "<text x='" << L << "' y='" << H - 8 << "' font-size='11'>" << format_double(xmin)
      << "</text>\n";
    f << "<text x='" << W - 60 << "' y='" << H - 8 << "' font-size='11'>" << format_double(xmax)
      << "</text>\n";
    f << "<text x='4' y='" << H - B << "' font-size='11'>" << format_double(ymin) << "</text>\n";
    f << "<text x='4' y='36' font-size='11'>" << format_double(ymax) << "</text>\n";
    if (connect && pts.size() > 1) {
        f << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
        for (const auto& [x, y] : pts) f << sx(x) << "," << sy(y) << " ";
        f << "'/>\n";
    }
    for (const auto& [x, y] : pts) {
        f << "<circle cx='" << sx(x) << "' cy='" << sy(y) << "' r='2.4' fill='steelblue'/>\n";
    }
    f << "</svg>\n";
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const std::string& out_dir, bool emit_plots) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    {
        auto f = open_out(dir / "steps.csv");
        f << "rep,policy,t,selected_count,mean_age,peak_age_running,mean_error_m,tracked_count,"
             "covered_untracked,uncovered\n";
        for (const auto& run : result.runs) {
            for (const auto& r : run.rows) {
                f << r.rep << ',' << r.policy << ',' << r.t << ',' << r.selected_count << ','
                  << format_double(r.mean_age) << ',' << format_double(r.peak_age_running) << ','
                  << format_double(r.mean_error_m) << ',' << r.tracked_count << ','
                  << r.covered_untracked << ',' << r.uncovered << '\n';
            }
        }
    }

    {
        nlohmann::json j;
        j["config"] = result.config;
        j["rep_seeds"] = result.rep_seeds;
        nlohmann::json pol = nlohmann::json::object();
        for (const auto& s : result.summaries) {
            nlohmann::json e;
            e["mean_capacity"] = s.mean_capacity;
            e["capacity_stderr"] = s.capacity_stderr;
            e["p_err_le_100m"] = s.p_err_le_100m;
            e["median_error_m"] = s.median_error_m;
            e["mean_error_m"] = s.mean_error_m;
            if (s.paoi)
                e["paoi"] = *s.paoi;
            else
                e["paoi"] = nullptr;
            e["mean_age"] = s.mean_age;
            if (s.scatter_slope)
                e["scatter_slope"] = *s.scatter_slope;
            else
                e["scatter_slope"] = nullptr;
            e["missed_mean"] = s.missed_covered_mean;
            e["uncovered_mean"] = s.uncovered_mean;
            e["fleet_mean_rate"] = s.fleet_mean_rate;
            e["max_node_rate"] = s.max_node_rate;
            pol[s.policy] = e;
        }
        j["policies"] = pol;
        auto f = open_out(dir / "summary.json");
        f << j.dump(2) << '\n';
    }

    {
        auto f = open_out(dir / "fig5_capacity.csv");
        f << "policy,mean_capacity,stderr\n";
        for (const auto& s : result.summaries)
            f << s.policy << ',' << format_double(s.mean_capacity) << ','
              << format_double(s.capacity_stderr) << '\n';
    }

    {
        auto f = open_out(dir / "fig7_scatter.csv");
        f << "policy,target_id,entropy_rate_bits,update_rate\n";
        for (const auto& s : result.summaries) {
            for (const auto& p : s.scatter)
                f << s.policy << ',' << p.target_id << ',' << format_double(p.entropy_rate) << ','
                  << format_double(p.update_rate) << '\n';
        }
    }

    {
        auto f = open_out(dir / "fig8_cdf.csv");
        f << "policy,threshold_m,cdf\n";
        for (const auto& s : result.summaries) {
            for (int th = 0; th <= 1000; th += 10)
                f << s.policy << ',' << th << ',' << format_double(s.errors.cdf_at(th)) << '\n';
        }
    }

    {
        auto f = open_out(dir / "fig10_paoi.csv");
        f << "policy,paoi\n";
        for (const auto& s : result.summaries)
            f << s.policy << ',' << format_double(s.paoi.value_or(-1.0)) << '\n';
    }

    {
        auto f = open_out(dir / "fig11_meanage.csv");
        f << "policy,capacity,mean_age\n";
        for (const auto& s : result.summaries)
            f << s.policy << ',' << format_double(result.config.C) << ','
              << format_double(s.mean_age) << '\n';
    }

    {
        auto f = open_out(dir / "fig12_missed.csv");
        f << "policy,covered_untracked_mean,uncovered_mean\n";
        for (const auto& s : result.summaries)
            f << s.policy << ',' << format_double(s.missed_covered_mean) << ','
              << format_double(s.uncovered_mean) << '\n';
    }

    if (emit_plots) {
        for (const auto& s : result.summaries) {
            std::vector<std::pair<double, double>> cdf;
            for (int th = 0; th <= 1000; th += 10) cdf.push_back({double(th), s.errors.cdf_at(th)});
            write_svg_scatter(dir / ("fig8_cdf_" + s.policy + ".svg"),
                              "error CDF: " + s.policy, cdf, true);
            std::vector<std::pair<double, double>> sc;
            for (const auto& p : s.scatter) sc.push_back({p.entropy_rate, p.update_rate});
            write_svg_scatter(dir / ("fig7_scatter_" + s.policy + ".svg"),
                              "entropy rate vs update rate: " + s.policy, sc, false);
        }
    }
}

void emit_sweep_outputs(const std::vector<SweepPoint>& points, const std::string& out_dir,
                        bool emit_plots) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    auto f = open_out(dir / "fig9_sweep.csv");
    f << "policy,capacity,median_error_m,mean_age,mean_capacity\n";
    for (const auto& p : points) {
        f << p.policy << ',' << format_double(p.capacity) << ',' << format_double(p.median_error_m)
          << ',' << format_double(p.mean_age) << ',' << format_double(p.mean_capacity) << '\n';
    }
    if (emit_plots) {
        std::map<std::string, std::vector<std::pair<double, double>>> by_policy;
        for (const auto& p : points) by_policy[p.policy].push_back({p.capacity, p.median_error_m});
        for (auto& [name, pts] : by_policy) {
            std::sort(pts.begin(), pts.end());
            write_svg_scatter(dir / ("fig9_sweep_" + name + ".svg"),
                              "median error vs capacity: " + name, pts, true);
        }
    }
}

}  // namespace crn::sim
