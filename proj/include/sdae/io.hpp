/*
 * Text output: CSV serialization of trajectories, lattices and convergence
 * reports, plus the run manifest written alongside every output file.
 *
 * Numbers are printed with 17 significant digits so doubles round-trip, and
 * identical inputs always serialize to identical bytes.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "sdae/brownian.hpp"
#include "sdae/convergence.hpp"
#include "sdae/errors.hpp"
#include "sdae/stepper.hpp"

namespace sdae {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Header `t,x_1,...,x_d`, one row per grid point.
inline std::string trajectory_csv(const Trajectory& tr) {
    std::string out = "t";
    const Index d = tr.states.empty() ? 0 : tr.states.front().size();
    for (Index i = 1; i <= d; ++i) {
        out += ",x_" + std::to_string(i);
    }
    out += "\n";
    for (std::size_t n = 0; n < tr.times.size(); ++n) {
        out += format_double(tr.times[n]);
        for (Index i = 0; i < d; ++i) {
            out += "," + format_double(tr.states[n](i));
        }
        out += "\n";
    }
    return out;
}

// Columns (index, dW_1..dW_d1).
inline std::string lattice_csv(const BrownianLattice& l) {
    std::string out = "index";
    for (Index j = 1; j <= l.dim_noise; ++j) {
        out += ",dW_" + std::to_string(j);
    }
    out += "\n";
    for (Index i = 0; i < l.n_fine; ++i) {
        out += std::to_string(i);
        for (Index j = 0; j < l.dim_noise; ++j) {
            out += "," + format_double(l.increments(i, j));
        }
        out += "\n";
    }
    return out;
}

// Error rows `sample,seed,N,sup_error` followed by `sample,rate` summary
// rows for the samples whose regression is defined.
inline std::string report_csv(const ConvergenceReport& report) {
    std::string out = "sample,seed,N,sup_error\n";
    for (std::size_t s = 0; s < report.samples.size(); ++s) {
        const auto& sample = report.samples[s];
        for (const auto& e : sample.errors) {
            out += std::to_string(s) + "," + std::to_string(sample.seed) + "," +
                   std::to_string(e.n_steps) + "," + format_double(e.sup_error) + "\n";
        }
    }
    out += "sample,rate\n";
    for (std::size_t s = 0; s < report.samples.size(); ++s) {
        if (report.samples[s].rate) {
            out += std::to_string(s) + "," + format_double(*report.samples[s].rate) +
                   "\n";
        }
    }
    return out;
}

// Rows `log2N,log10_error,sample` for external log-log plotting. Zero
// errors cannot be plotted on a log axis and are skipped.
inline std::string plot_data_csv(const ConvergenceReport& report) {
    std::string out = "log2N,log10_error,sample\n";
    for (std::size_t s = 0; s < report.samples.size(); ++s) {
        for (const auto& e : report.samples[s].errors) {
            if (!(e.sup_error > 0.0)) {
                continue;
            }
            out += format_double(std::log2(static_cast<double>(e.n_steps))) + "," +
                   format_double(std::log10(e.sup_error)) + "," + std::to_string(s) +
                   "\n";
        }
    }
    return out;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open output file " + path.string());
    }
    out << content;
    if (!out) {
        throw ConfigError("failed writing " + path.string());
    }
}

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string command;
    std::string problem_name;
    std::map<std::string, std::string> parameters;
    std::string tool_version = kToolVersion;
    std::string timestamp;

    static std::string now_utc() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::string to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["problem"] = problem_name;
        j["parameters"] = parameters;
        j["tool_version"] = tool_version;
        j["timestamp"] = timestamp;
        return j.dump(2) + "\n";
    }
};

// Every output file gets a sibling `<file>.manifest.json`.
inline void write_with_manifest(const std::filesystem::path& path,
                                const std::string& content,
                                const RunManifest& manifest) {
    write_text_file(path, content);
    std::filesystem::path mpath = path;
    mpath += ".manifest.json";
    write_text_file(mpath, manifest.to_json());
}

}  // namespace sdae
