#include "sareo/pipeline.hpp"
#include "sareo/synth.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <string>

namespace {

int exit_code_for(const sareo::Error& e) {
    switch (e.code()) {
        case sareo::Errc::ConfigError:
            return 2;
        case sareo::Errc::CommandFailed:
        case sareo::Errc::IncompleteOutputs:
            return 4;
        default:
            return 3;
    }
}

void print_report(const sareo::StageReport& r) {
    std::string dropped;
    for (const auto& [rule, n] : r.dropped) {
        if (!dropped.empty()) dropped += ", ";
        dropped += rule + "=" + std::to_string(n);
    }
    std::fprintf(stderr, "%-9s input=%llu kept=%llu%s%s  (%.2fs)\n", r.stage.c_str(),
                 static_cast<unsigned long long>(r.input), static_cast<unsigned long long>(r.kept),
                 dropped.empty() ? "" : " dropped: ", dropped.c_str(), r.wall_seconds);
}

sareo::Config load_config(const std::string& path) {
    if (path.empty()) return sareo::Config::from_registry(sareo::pipeline_registry());
    return sareo::load_pipeline_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SAR-to-EO dataset curation pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path;
    std::string out_dir = "out";
    unsigned workers = 1;
    app.add_option("--config", config_path, "pipeline config file");
    app.add_option("--out", out_dir, "output directory for manifests, reports, and rasters");
    app.add_option("--workers", workers, "worker thread count (1 = serial)");

    for (const std::string& stage : sareo::stage_order())
        app.add_subcommand(stage, "run the " + stage + " stage");

    auto* eval_cmd = app.get_subcommand("eval");
    std::string eval_outputs, eval_references, eval_mapping, eval_norm;
    eval_cmd->add_option("--outputs", eval_outputs, "directory holding model outputs");
    eval_cmd->add_option("--references", eval_references, "directory holding reference images");
    eval_cmd->add_option("--mapping", eval_mapping, "CSV of query_key,role,path rows");
    eval_cmd->add_option("--norm", eval_norm, "per-pixel distance: meanabs or meansq");

    auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string synth_spec_path;
    synth_cmd->add_option("--spec", synth_spec_path, "synth config file (defaults used when absent)");

    auto* report_cmd = app.add_subcommand("report", "print the stage reports under --out");

    auto* run_cmd = app.add_subcommand("run", "run a contiguous stage range");
    std::string stage_from = "ingest";
    std::string stage_to = "pair";
    run_cmd->add_option("--stage-from", stage_from, "first stage to run");
    run_cmd->add_option("--stage-to", stage_to, "last stage to run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth_cmd->parsed()) {
            sareo::Config cfg = synth_spec_path.empty()
                                    ? sareo::Config::from_registry(sareo::synth_registry())
                                    : sareo::Config::load(synth_spec_path, sareo::synth_registry());
            const sareo::SynthSpec spec = sareo::synth_spec_from_config(cfg);
            const sareo::SynthResult result = sareo::generate(spec, out_dir);
            std::fprintf(stderr, "synth     tiles=%zu labels=%zu cloud_subset=%zu -> %s\n",
                         result.records.size(), result.labels.size(),
                         result.cloud_subset_ids.size(), out_dir.c_str());
            return 0;
        }

        if (report_cmd->parsed()) {
            bool any = false;
            for (const std::string& stage : sareo::stage_order()) {
                const auto path = sareo::report_path(out_dir, stage);
                if (!std::filesystem::exists(path)) continue;
                const sareo::Json j = sareo::Json::parse(sareo::read_file(path));
                std::printf("%-9s input=%llu kept=%llu wall=%.2fs tiles/s=%.1f\n", stage.c_str(),
                            j.at("input").get<unsigned long long>(),
                            j.at("kept").get<unsigned long long>(),
                            j.at("wall_seconds").get<double>(),
                            j.at("tiles_per_second").get<double>());
                any = true;
            }
            sareo::require(any, sareo::Errc::IoError,
                           "no stage reports under " + out_dir + "/reports");
            return 0;
        }

        sareo::PipelineContext ctx;
        ctx.config = load_config(config_path);
        ctx.out_dir = out_dir;
        ctx.workers = workers == 0 ? 1 : workers;

        if (eval_cmd->parsed()) {
            if (!eval_outputs.empty()) ctx.config.set("eval.outputs", eval_outputs);
            if (!eval_references.empty()) ctx.config.set("eval.references", eval_references);
            if (!eval_mapping.empty()) ctx.config.set("eval.mapping", eval_mapping);
            if (!eval_norm.empty()) ctx.config.set("eval.norm", eval_norm);
            const sareo::EvalOutcome outcome = sareo::run_eval(ctx);
            std::printf("%s\n", outcome.report.dump(2).c_str());
            print_report(outcome.stage_report);
            return 0;
        }

        const std::string single = app.get_subcommands().front()->get_name();
        const std::string from = run_cmd->parsed() ? stage_from : single;
        const std::string to = run_cmd->parsed() ? stage_to : single;
        for (const sareo::StageReport& r : sareo::run_range(ctx, from, to)) print_report(r);
        return 0;
    } catch (const sareo::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
