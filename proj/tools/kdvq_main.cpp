// Batch front-end: one subcommand per experiment, CSV/JSON artifacts plus a
// manifest under --output-dir.  `kdvq <command> --help` lists the flags.

#include <cstdio>
#include <fstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kdvq/driver.hpp"

using nlohmann::json;

namespace {

struct CommonFlags {
    std::string output_dir = "kdvq-out";
    std::string config_file;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--output-dir", flags.output_dir, "Artifact directory");
    cmd->add_option("--config", flags.config_file,
                    "JSON file with the same parameter schema; flags override it");
    cmd->add_option("--seed", flags.seed, "Seed for randomized sweeps");
    cmd->add_option("--workers", flags.workers,
                    "Worker threads (results are worker-count independent)");
}

int execute(const std::string& command, const CommonFlags& flags, json params) {
    if (!flags.config_file.empty()) {
        std::ifstream in(flags.config_file);
        if (!in) {
            std::fprintf(stderr, "cannot read config file %s\n", flags.config_file.c_str());
            return 2;
        }
        json file_params = json::parse(in, nullptr, false);
        if (file_params.is_discarded() || !file_params.is_object()) {
            std::fprintf(stderr, "config file %s is not a JSON object\n",
                         flags.config_file.c_str());
            return 2;
        }
        file_params.update(params);  // explicit flags win
        params = std::move(file_params);
    }
    kdvq::driver::RunConfig config;
    config.command = command;
    config.parameters = std::move(params);
    config.output_dir = flags.output_dir;
    config.seed = flags.seed;
    config.workers = flags.workers;
    const auto result = kdvq::driver::run(config);
    if (result.exit_code != 0 && result.manifest.contains("error"))
        std::fprintf(stderr, "%s\n", result.manifest["error"].dump(2).c_str());
    else
        std::printf("%s\n", result.manifest["results"].dump(2).c_str());
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral KdV/Airy toolkit on two-frequency lattices"};
    app.require_subcommand(1);

    struct Pending {
        CommonFlags flags;
        json params = json::object();
    };
    std::vector<std::pair<CLI::App*, std::shared_ptr<Pending>>> subs;

    auto add_cmd = [&](const std::string& name, const std::string& desc) {
        auto pending = std::make_shared<Pending>();
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common(cmd, pending->flags);
        subs.push_back({cmd, pending});
        return std::make_pair(cmd, pending);
    };

    auto opt_d = [](CLI::App* cmd, json& p, const char* flag, const char* key,
                    const char* help) {
        cmd->add_option_function<double>(
               flag, [&p, key = std::string(key)](double v) { p[key] = v; }, help);
    };
    auto opt_i = [](CLI::App* cmd, json& p, const char* flag, const char* key,
                    const char* help) {
        cmd->add_option_function<long long>(
               flag, [&p, key = std::string(key)](long long v) { p[key] = v; }, help);
    };
    auto opt_s = [](CLI::App* cmd, json& p, const char* flag, const char* key,
                    const char* help) {
        cmd->add_option_function<std::string>(
               flag, [&p, key = std::string(key)](const std::string& v) { p[key] = v; }, help);
    };
    auto opt_alpha = [](CLI::App* cmd, json& p) {
        cmd->add_option_function<std::string>(
            "--alpha",
            [&p](const std::string& v) {
                const auto comma = v.find(',');
                if (comma == std::string::npos) {
                    p["alpha"] = {std::stod(v), std::stod(v) * std::sqrt(2.0)};
                } else {
                    p["alpha"] = {std::stod(v.substr(0, comma)), std::stod(v.substr(comma + 1))};
                }
            },
            "Frequency vector a1,a2 (a single value a pairs with a*sqrt(2))");
    };

    {
        auto [cmd, pd] = add_cmd("airy-evolve", "Airy flow of square-wave data");
        opt_alpha(cmd, pd->params);
        opt_i(cmd, pd->params, "--N", "N", "Mode truncation");
        opt_d(cmd, pd->params, "--t", "t", "Evolution time");
        opt_s(cmd, pd->params, "--component", "component", "1, 2 or both");
        opt_i(cmd, pd->params, "--samples", "samples", "Sample count");
        opt_d(cmd, pd->params, "--window", "window", "Half width of the sample window");
    }
    {
        auto [cmd, pd] = add_cmd("talbot", "Rational-time square-wave reconstruction");
        opt_i(cmd, pd->params, "--p", "p", "Numerator of alpha^3 t / 2pi");
        opt_i(cmd, pd->params, "--q", "q", "Denominator (coprime with p)");
        opt_d(cmd, pd->params, "--alpha", "alpha", "Scalar wavenumber");
        opt_i(cmd, pd->params, "--N", "N", "Partial-sum truncation");
        opt_i(cmd, pd->params, "--samples", "samples", "Sample count");
        opt_d(cmd, pd->params, "--window", "window", "Half width of the sample window");
    }
    {
        auto [cmd, pd] = add_cmd("kdv-solve", "KdV coefficient evolution from square-wave data");
        opt_alpha(cmd, pd->params);
        opt_i(cmd, pd->params, "--N", "N", "Lattice truncation");
        opt_d(cmd, pd->params, "--T", "T", "Horizon (negative integrates backwards)");
        opt_d(cmd, pd->params, "--dt", "dt", "Time step");
        opt_s(cmd, pd->params, "--scheme", "scheme",
              "exponential-rk4 or picard-fixed-point");
        opt_d(cmd, pd->params, "--epsilon", "epsilon", "Initial-data scale");
        opt_d(cmd, pd->params, "--theta", "theta", "G^theta exponent for reporting");
        opt_i(cmd, pd->params, "--store-every", "store_every", "State CSV stride");
    }
    {
        auto [cmd, pd] = add_cmd("smoothing-report", "l1 distance to the Airy flow");
        opt_alpha(cmd, pd->params);
        opt_i(cmd, pd->params, "--N", "N", "Lattice truncation");
        opt_d(cmd, pd->params, "--T", "T", "Horizon");
        opt_d(cmd, pd->params, "--dt", "dt", "Time step");
        opt_d(cmd, pd->params, "--epsilon", "epsilon", "Initial-data scale");
        opt_d(cmd, pd->params, "--theta", "theta", "G^theta exponent");
        opt_d(cmd, pd->params, "--margin", "margin", "Region-classifier margin");
    }
    {
        auto [cmd, pd] = add_cmd("greens-verify", "Green's bounds and static identities");
        opt_s(cmd, pd->params, "--q", "q",
              "Potential: constant:c | gaussian:amp[:w] | random:sup:seed | sine:amp:f");
        opt_d(cmd, pd->params, "--kappa", "kappa", "Spectral parameter");
        opt_d(cmd, pd->params, "--L", "L", "Window half width");
        opt_d(cmd, pd->params, "--grid-h", "h", "Grid spacing");
        opt_d(cmd, pd->params, "--tol", "tol", "Series tolerance");
    }
    {
        auto [cmd, pd] = add_cmd("gronwall-check", "Dynamic, Gronwall and q-diff identities");
        opt_d(cmd, pd->params, "--kappa", "kappa", "Spectral parameter");
        opt_d(cmd, pd->params, "--L", "L", "Window half width");
        opt_i(cmd, pd->params, "--x-nodes", "x_nodes", "Spatial nodes");
        opt_i(cmd, pd->params, "--t-slices", "t_slices", "Time slices");
        opt_d(cmd, pd->params, "--t-end", "t_end", "Final time");
        opt_d(cmd, pd->params, "--amplitude", "amplitude", "Manufactured amplitude");
        opt_d(cmd, pd->params, "--R", "R", "sech weight scale");
    }
    {
        auto [cmd, pd] = add_cmd("almost-periods", "Bohr almost-period scan of sq + sq(a2 x)");
        opt_alpha(cmd, pd->params);
        opt_d(cmd, pd->params, "--epsilon", "epsilon", "Acceptance threshold");
        opt_d(cmd, pd->params, "--shift-step", "shift_step", "Candidate spacing");
        opt_i(cmd, pd->params, "--shift-count", "shift_count", "Candidates each side of 0");
        opt_i(cmd, pd->params, "--samples", "samples", "Window sample count");
    }
    {
        auto [cmd, pd] = add_cmd("stepanov-demo", "Stepanov norms and the wave-packet pileup");
        opt_d(cmd, pd->params, "--p", "p", "Stepanov exponent");
        opt_i(cmd, pd->params, "--n-max", "n_max", "Packet scale cutoff");
        opt_i(cmd, pd->params, "--k-max", "k_max", "Translate cutoff");
        opt_d(cmd, pd->params, "--t0", "t0", "Refocusing time");
    }
    {
        auto [cmd, pd] = add_cmd("deift-pipeline",
                                 "Square-wave KdV run, smoothing, and almost-period scans");
        opt_alpha(cmd, pd->params);
        opt_i(cmd, pd->params, "--N", "N", "Lattice truncation");
        opt_d(cmd, pd->params, "--T", "T", "Horizon");
        opt_d(cmd, pd->params, "--dt", "dt", "Time step");
        opt_d(cmd, pd->params, "--theta", "theta", "G^theta exponent");
        opt_i(cmd, pd->params, "--slice-N", "slice_N", "Linear-slice mode truncation");
        opt_d(cmd, pd->params, "--slice-t", "slice_t", "Irrational-time slice");
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& [cmd, pending] : subs)
        if (cmd->parsed()) return execute(cmd->get_name(), pending->flags, pending->params);
    return 1;
}
