#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/parallel.hpp"
#include "tunnelkit/pipeline.hpp"

namespace fs = std::filesystem;
namespace tk = tunnelkit;

namespace {

int report(std::string_view kind, const std::string& message, int code) {
    nlohmann::ordered_json d{{"level", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << d.dump() << std::endl;
    return code;
}

fs::path resolve_dir(const std::string& flag, const tk::PipelineConfig& config) {
    return flag.empty() ? fs::path(config.output_dir) : fs::path(flag);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    tk::require(!ec, tk::ErrorKind::Usage, "cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tunneling kinetics data generation, surrogate models and phase diagrams"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tunnelkit 1.0.0");

    std::string config_path;
    unsigned threads = 0;
    std::string dir_flag;
    std::string family_name;
    std::string plan_name = "kfold";
    int plan_index = 0;
    std::string model_path;

    app.add_option("--threads", threads, "Worker thread cap (default: hardware concurrency)")
        ->check(CLI::PositiveNumber);

    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Pipeline configuration (JSON)")->required();
        sub->add_option("--threads", threads, "Worker thread cap (default: hardware concurrency)")
            ->check(CLI::PositiveNumber);
        return sub;
    };

    auto* gen = with_config(app.add_subcommand("gen", "Build the catalog and raw rate curves"));
    gen->add_option("--out", dir_flag, "Output directory (default: config output_dir)");

    auto* aug = with_config(app.add_subcommand("augment", "Fit Arrhenius curves and assemble the dataset"));
    aug->add_option("--in", dir_flag, "Directory holding gen outputs (default: config output_dir)");

    auto* train = with_config(app.add_subcommand("train", "Search and fit one model family"));
    train->add_option("--family", family_name, "Model family (default: config model.train_family)");
    train->add_option("--plan", plan_name, "Split protocol")->check(CLI::IsMember({"kfold", "loo"}));
    train->add_option("--plan-index", plan_index, "Which plan of the protocol to use")->check(CLI::NonNegativeNumber);
    train->add_option("--in", dir_flag, "Working directory (default: config output_dir)");

    auto* bench = with_config(app.add_subcommand("benchmark", "Run every family over every split plan"));
    bench->add_option("--in", dir_flag, "Working directory (default: config output_dir)");

    auto* expl = with_config(app.add_subcommand("explain", "Exact Shapley attributions for a trained model"));
    expl->add_option("--model", model_path, "Model document (default: <dir>/model.json)");
    expl->add_option("--in", dir_flag, "Working directory (default: config output_dir)");

    auto* phase = with_config(app.add_subcommand("phase", "Regime classification and phase diagram panels"));
    phase->add_option("--in", dir_flag, "Working directory (default: config output_dir)");

    auto* vp = with_config(app.add_subcommand("validate-physics", "Run the physics and kinetics oracle suite"));

    auto* run = with_config(app.add_subcommand("run", "gen, augment, phase, train, explain and benchmark"));
    run->add_option("--out", dir_flag, "Output directory (default: config output_dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("Usage", e.what(), 2);
    }

    try {
        if (threads > 0) tk::set_max_threads(threads);
        const auto config = tk::load_config(config_path);
        const fs::path dir = resolve_dir(dir_flag, config);
        std::ostream& log = std::cout;

        if (*gen) {
            ensure_dir(dir);
            tk::run_gen(config, dir, log);
        } else if (*aug) {
            tk::run_augment(config, dir, log);
        } else if (*train) {
            const tk::Family family =
                family_name.empty() ? config.model.train_family : tk::family_from_string(family_name);
            const tk::PlanKind kind = plan_name == "loo" ? tk::PlanKind::LeaveOneSystemOut : tk::PlanKind::KFold;
            tk::run_train(config, dir, family, kind, plan_index, log);
        } else if (*bench) {
            tk::run_benchmark(config, dir, log);
        } else if (*expl) {
            tk::run_explain(config, dir, model_path.empty() ? dir / "model.json" : fs::path(model_path), log);
        } else if (*phase) {
            tk::run_phase(config, dir, log);
        } else if (*vp) {
            const int failed = tk::run_validate_physics(config, log);
            if (failed > 0) {
                return report("Numerical", std::to_string(failed) + " physics oracle check(s) failed", 4);
            }
        } else if (*run) {
            ensure_dir(dir);
            tk::run_pipeline(config, dir, log);
        }
        return 0;
    } catch (const tk::Error& e) {
        return report(tk::to_string(e.kind()), e.what(), tk::exit_code(e.kind()));
    } catch (const nlohmann::json::exception& e) {
        return report("Format", e.what(), 3);
    } catch (const std::exception& e) {
        return report("Internal", e.what(), 4);
    }
}
