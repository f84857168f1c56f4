#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lspie/pipeline.hpp"

namespace {

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

/// Read a flat key=value file (the format run writes as config.txt) and hand
/// each pair to `apply`. Blank lines and #-comments are skipped.
void for_each_config_entry(const std::string& path,
                           const std::function<void(const std::string&, const std::string&)>& apply) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line is not key=value: " + line);
        apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config key " + key + " wants true/false, got: " + value);
}

void print_report(const lspie::RunReport& report) {
    std::cout << "output: " << report.config.output_dir.string() << '\n';
    std::cout << "model:  " << report.model.id;
    if (!report.ica_converged) std::cout << "  (not converged)";
    std::cout << '\n';
    if (report.condensed_k > 0) {
        std::cout << "condensed to " << report.condensed_k << " cluster"
                  << (report.condensed_k == 1 ? "" : "s") << ":";
        for (const auto& members : report.cluster_assignments) {
            std::cout << " {";
            for (std::size_t i = 0; i < members.size(); ++i)
                std::cout << (i ? "," : "") << "L" << members[i];
            std::cout << "}";
        }
        std::cout << '\n';
    }
    std::cout << "metric: " << report.metric_table.metric_name << '\n';
    std::cout << std::left << std::setw(8) << "index" << std::setw(16) << "theta" << "score"
              << '\n';
    std::ostringstream row;
    row << std::setprecision(6);
    for (int i = 0; i < report.metric_table.values.size(); ++i) {
        row.str("");
        const std::string label = (report.condensed_k > 0 ? "C" : "L") +
                                  std::to_string(report.metric_indices[static_cast<std::size_t>(i)]);
        row << std::left << std::setw(8) << label << std::setw(16)
            << report.metric_table.values(i) << report.metric_table.scores(i);
        std::cout << row.str() << '\n';
    }
    row.str("");
    row << std::setprecision(3) << report.elapsed_seconds;
    std::cout << "elapsed: " << row.str() << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lspie: fit latent variable models to time-series trajectory matrices and "
                 "rank, scale, cluster or condense the latent directions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lspie 0.1.0");

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "Write a built-in test signal to CSV");
    std::string gen_signal = "pure_sine";
    int gen_samples = 4000;
    double gen_rate = 106.10329539459689;
    std::string gen_output;
    gen_cmd->add_option("--signal", gen_signal, "Signal name")
        ->check(CLI::IsMember({"pure_sine", "decreasing_freq"}));
    gen_cmd->add_option("--n-samples", gen_samples, "Number of samples")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--rate", gen_rate, "Sample rate (Hz)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--output", gen_output, "Output CSV path")->required();
    gen_cmd->callback([&] {
        const lspie::TimeSeries series = lspie::generate_signal(
            lspie::signal_kind_from_string(gen_signal), gen_samples, gen_rate);
        lspie::write_series_csv(series, gen_output);
        std::cout << "wrote " << gen_output << " (" << series.values.size() << " samples)\n";
    });

    // run
    auto* run_cmd = app.add_subcommand("run", "Run one experiment");
    std::string config_path;
    run_cmd->add_option("--config", config_path,
                        "Key=value file (the config.txt a run writes); explicit flags win");
    std::string signal_name, csv_path, model_name = "pca", metric = "variance_explained";
    std::string enhance_list, order_name = "descending", similarity_name = "abs_cosine";
    std::string backend_name = "agglomerative", filter_state = "off";
    std::string filter_mode_name = "zero_phase", contrast_name = "logcosh", output_dir;
    bool time_column = false, scale_division = false;
    int n_samples = 4000, window = 300, k = 8, cluster_k = 0, min_members = 1;
    int filter_order = 4, max_iter = 200;
    double rate = 106.10329539459689, eps = 0.2, filter_cutoff = 0.1, tol = 1e-4;
    std::uint64_t seed = 0;

    run_cmd->add_option("--signal", signal_name, "Built-in signal name")
        ->check(CLI::IsMember({"pure_sine", "decreasing_freq"}));
    run_cmd->add_option("--csv", csv_path, "Input CSV path");
    run_cmd->add_flag("--time-column", time_column, "First CSV column is time");
    run_cmd->add_option("--n-samples", n_samples, "Samples for built-in signals");
    run_cmd->add_option("--rate", rate, "Sample rate for built-in signals (Hz)");
    run_cmd->add_option("--window", window, "Trajectory matrix window length");
    run_cmd->add_option("--model", model_name, "Latent variable model")
        ->check(CLI::IsMember({"pca", "ica"}));
    run_cmd->add_option("--k", k, "Number of latent directions");
    run_cmd->add_option("--metric", metric, "Informativeness metric name");
    run_cmd->add_option("--enhance", enhance_list,
                        "Comma-separated steps: rank,scale,cluster,condense");
    run_cmd->add_option("--order", order_name, "Ranking order")
        ->check(CLI::IsMember({"descending", "ascending"}));
    run_cmd->add_flag("--scale-division", scale_division, "Divide by scores instead of multiplying");
    run_cmd->add_option("--similarity", similarity_name, "Direction similarity")
        ->check(CLI::IsMember({"abs_cosine", "score_correlation"}));
    run_cmd->add_option("--backend", backend_name, "Clustering backend")
        ->check(CLI::IsMember({"agglomerative", "kmeans"}));
    run_cmd->add_option("--cluster-k", cluster_k, "Cluster count for the cluster step");
    run_cmd->add_option("--eps", eps, "Condense neighbourhood radius");
    run_cmd->add_option("--min-members", min_members, "Condense core-point threshold");
    run_cmd->add_option("--filter", filter_state, "Low-pass merged directions")
        ->check(CLI::IsMember({"off", "on"}));
    run_cmd->add_option("--filter-order", filter_order, "Butterworth order (1-8)");
    run_cmd->add_option("--filter-cutoff", filter_cutoff, "Cutoff, cycles/sample (0, 0.5)");
    run_cmd->add_option("--filter-mode", filter_mode_name, "Filter application mode")
        ->check(CLI::IsMember({"zero_phase", "causal"}));
    run_cmd->add_option("--contrast", contrast_name, "ICA contrast function")
        ->check(CLI::IsMember({"logcosh", "cube"}));
    run_cmd->add_option("--tol", tol, "ICA convergence tolerance");
    run_cmd->add_option("--max-iter", max_iter, "ICA iteration cap");
    run_cmd->add_option("--seed", seed, "Random seed (ICA initialisation)");
    run_cmd->add_option("--output-dir", output_dir, "Output directory (default lspie_out/<timestamp>)");
    run_cmd->callback([&] {
        if (!config_path.empty()) {
            const std::map<std::string, std::function<void(const std::string&)>> setters = {
                {"signal", [&](const std::string& v) { signal_name = v; }},
                {"csv", [&](const std::string& v) { csv_path = v; }},
                {"time-column", [&](const std::string& v) { time_column = parse_bool(v, "time-column"); }},
                {"n-samples", [&](const std::string& v) { n_samples = std::stoi(v); }},
                {"rate", [&](const std::string& v) { rate = std::stod(v); }},
                {"window", [&](const std::string& v) { window = std::stoi(v); }},
                {"model", [&](const std::string& v) { model_name = v; }},
                {"k", [&](const std::string& v) { k = std::stoi(v); }},
                {"metric", [&](const std::string& v) { metric = v; }},
                {"enhance", [&](const std::string& v) { enhance_list = v; }},
                {"order", [&](const std::string& v) { order_name = v; }},
                {"scale-division", [&](const std::string& v) { scale_division = parse_bool(v, "scale-division"); }},
                {"similarity", [&](const std::string& v) { similarity_name = v; }},
                {"backend", [&](const std::string& v) { backend_name = v; }},
                {"cluster-k", [&](const std::string& v) { cluster_k = std::stoi(v); }},
                {"eps", [&](const std::string& v) { eps = std::stod(v); }},
                {"min-members", [&](const std::string& v) { min_members = std::stoi(v); }},
                {"filter", [&](const std::string& v) { filter_state = v; }},
                {"filter-order", [&](const std::string& v) { filter_order = std::stoi(v); }},
                {"filter-cutoff", [&](const std::string& v) { filter_cutoff = std::stod(v); }},
                {"filter-mode", [&](const std::string& v) { filter_mode_name = v; }},
                {"contrast", [&](const std::string& v) { contrast_name = v; }},
                {"tol", [&](const std::string& v) { tol = std::stod(v); }},
                {"max-iter", [&](const std::string& v) { max_iter = std::stoi(v); }},
                {"seed", [&](const std::string& v) { seed = std::stoull(v); }},
                {"output-dir", [&](const std::string& v) { output_dir = v; }},
            };
            for_each_config_entry(config_path, [&](const std::string& key, const std::string& value) {
                const auto it = setters.find(key);
                if (it == setters.end()) throw std::runtime_error("unknown config key: " + key);
                if (run_cmd->count("--" + key) == 0) it->second(value);
            });
        }

        lspie::RunConfig config;
        if (!signal_name.empty()) config.signal = lspie::signal_kind_from_string(signal_name);
        config.csv_path = csv_path;
        config.time_column = time_column;
        config.n_samples = n_samples;
        config.sample_rate = rate;
        config.window = window;
        config.model = lspie::model_kind_from_string(model_name);
        config.k = k;
        config.metric = metric;
        for (const std::string& step : split_csv_list(enhance_list))
            config.enhancements.push_back(lspie::enhance_step_from_string(step));
        config.order = lspie::rank_order_from_string(order_name);
        config.scale_opts.division = scale_division;
        config.similarity = lspie::similarity_from_string(similarity_name);
        config.backend = lspie::cluster_backend_from_string(backend_name);
        config.cluster_k = cluster_k;
        config.condense_opts.eps = eps;
        config.condense_opts.min_members = min_members;
        config.filter_enabled = filter_state == "on";
        config.filter.order = filter_order;
        config.filter.cutoff = filter_cutoff;
        config.filter.mode = lspie::filter_mode_from_string(filter_mode_name);
        config.ica.contrast = lspie::ica_contrast_from_string(contrast_name);
        config.ica.tol = tol;
        config.ica.max_iter = max_iter;
        config.seed = seed;
        config.output_dir = output_dir;
        print_report(lspie::run_experiment(config));
    });

    // reproduce-paper
    auto* repro_cmd =
        app.add_subcommand("reproduce-paper", "Run the four bundled reference experiments");
    std::string repro_output;
    std::uint64_t repro_seed = 0;
    repro_cmd->add_option("--output-dir", repro_output, "Output root directory");
    repro_cmd->add_option("--seed", repro_seed, "Random seed");
    repro_cmd->callback([&] {
        const std::filesystem::path root = repro_output.empty()
                                               ? lspie::default_output_dir()
                                               : std::filesystem::path(repro_output);
        const std::vector<lspie::RunReport> reports = lspie::reproduce_paper(root, repro_seed);
        for (const lspie::RunReport& report : reports) {
            print_report(report);
            std::cout << '\n';
        }
        std::cout << reports.size() << " experiments written under " << root.string() << '\n';
    });

    // list-metrics
    auto* list_cmd = app.add_subcommand("list-metrics", "List registered metric names");
    list_cmd->callback([&] {
        for (const std::string& name : lspie::MetricRegistry::instance().names())
            std::cout << name << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
