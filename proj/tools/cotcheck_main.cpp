// cotcheck — reasoning-fidelity diagnostics for chain-of-thought QA output.
//
// Subcommands: ingest, perturb, eval-answers, eval-explanations,
// eval-robustness, eval-logic, eval-counterfactual, report-merge, run.
// Exit codes: 0 success, 1 usage error, 2 analysis failure,
// 3 transport/cache failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cotcheck/http_transport.hpp"
#include "cotcheck/pipeline.hpp"
#include "cotcheck/version.hpp"

namespace {

using namespace cotcheck;

struct CommonOpts {
    std::string config;
    std::string corpus;
    std::string out_dir;
    std::string mode;
    std::string cache;
    std::string endpoint;
    std::string model;
    std::string categorize_mode;
    std::string analyses;
    long long seed = -1;
    int concurrency = -1;
    int retry_cap = -1;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
    cmd->add_option("--config", opts->config, "flat key=value config file");
    cmd->add_option("--corpus", opts->corpus, "canonical JSON-lines corpus");
    cmd->add_option("--out-dir", opts->out_dir, "output directory");
    cmd->add_option("--mode", opts->mode, "gateway mode: record|replay|live");
    cmd->add_option("--cache", opts->cache, "response cache file");
    cmd->add_option("--endpoint", opts->endpoint, "generation endpoint URL");
    cmd->add_option("--model", opts->model, "model id");
    cmd->add_option("--categorize-mode", opts->categorize_mode,
                    "hop bucketing: question|annotated");
    cmd->add_option("--seed", opts->seed, "run seed");
    cmd->add_option("--concurrency", opts->concurrency, "max in-flight generations");
    cmd->add_option("--retry-cap", opts->retry_cap, "transport retry cap");
}

RunConfig build_config(const CLI::App* cmd, const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config.empty()) cfg = load_run_config(opts.config);
    if (cmd->count("--corpus")) cfg.corpus_path = opts.corpus;
    if (cmd->count("--out-dir")) cfg.output_dir = opts.out_dir;
    if (cmd->count("--mode")) cfg.gateway.mode = parse_gateway_mode(opts.mode);
    if (cmd->count("--cache")) cfg.gateway.cache_path = opts.cache;
    if (cmd->count("--endpoint")) cfg.gateway.endpoint_url = opts.endpoint;
    if (cmd->count("--model")) cfg.gateway.model_id = opts.model;
    if (cmd->count("--categorize-mode")) {
        cfg.categorize_mode = parse_categorize_mode(opts.categorize_mode);
    }
    if (cmd->count("--seed")) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (cmd->count("--concurrency")) cfg.gateway.concurrency = opts.concurrency;
    if (cmd->count("--retry-cap")) cfg.gateway.retry_cap = opts.retry_cap;
    if (const char* env_key = std::getenv("COTCHECK_API_KEY")) {
        cfg.gateway.api_key = env_key;
    }
    return cfg;
}

/// Runs one analysis section and writes <name>_section.json for report-merge.
int run_single_section(const CLI::App* cmd, const CommonOpts& opts, Analysis analysis) {
    RunConfig cfg = build_config(cmd, opts);
    cfg.analyses = {analysis};
    Pipeline pipeline(cfg, http_post_transport);
    std::filesystem::create_directories(cfg.output_dir);
    nlohmann::json report;
    report["meta"] = pipeline.make_meta();
    nlohmann::json section;
    switch (analysis) {
        case Analysis::answers: section = pipeline.answers_section(); break;
        case Analysis::explanations: section = pipeline.explanations_section(); break;
        case Analysis::robustness: section = pipeline.robustness_section(); break;
        case Analysis::logic: section = pipeline.logic_section(); break;
        case Analysis::counterfactual: section = pipeline.counterfactual_section(); break;
    }
    report["sections"][to_string(analysis)] = section;
    const auto out = cfg.output_dir / (std::string(to_string(analysis)) + "_section.json");
    detail::write_file(out, report.dump(2) + "\n");
    std::cout << to_string(analysis) << ": ok -> " << out.string() << "\n";
    return 0;
}

int dispatch(const std::function<int()>& body) {
    try {
        return body();
    } catch (const CacheMissError& e) {
        std::cerr << "cache failure: " << e.what() << "\n";
        return 3;
    } catch (const TransportError& e) {
        std::cerr << "transport failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reasoning-fidelity diagnostics for chain-of-thought QA"};
    app.set_version_flag("--version", std::string("cotcheck ") + kVersion);
    app.require_subcommand(1);

    // ingest
    auto* ingest_cmd = app.add_subcommand(
        "ingest", "validate a corpus or convert a raw MenatQA dump to canonical JSONL");
    std::string ingest_in;
    std::string ingest_out;
    std::string ingest_format = "auto";
    ingest_cmd->add_option("--input", ingest_in, "input file")->required();
    ingest_cmd->add_option("--output", ingest_out, "canonical JSONL output")->required();
    ingest_cmd->add_option("--format", ingest_format, "auto|canonical|menatqa")
        ->check(CLI::IsMember({"auto", "canonical", "menatqa"}));

    // perturb
    auto* perturb_cmd =
        app.add_subcommand("perturb", "write a perturbed variant corpus for one kind");
    CommonOpts perturb_opts;
    std::string perturb_kind;
    std::string perturb_out;
    add_common(perturb_cmd, &perturb_opts);
    perturb_cmd->add_option("--kind", perturb_kind, "perturbation kind")->required();
    perturb_cmd->add_option("--out", perturb_out, "variant corpus output file")->required();

    // eval-* subcommands
    auto* answers_cmd = app.add_subcommand("eval-answers", "EM/F1/BLEU/CoT-EM metrics");
    CommonOpts answers_opts;
    add_common(answers_cmd, &answers_opts);
    auto* explain_cmd =
        app.add_subcommand("eval-explanations", "faithfulness/plausibility audit");
    CommonOpts explain_opts;
    add_common(explain_cmd, &explain_opts);
    auto* robx_cmd = app.add_subcommand("eval-robustness", "perturbation robustness table");
    CommonOpts robx_opts;
    std::string robx_rows;
    add_common(robx_cmd, &robx_opts);
    robx_cmd->add_option("--from-rows", robx_rows,
                         "compute the composite from precomputed aggregate rows (CSV), "
                         "no generation");
    auto* logic_cmd = app.add_subcommand("eval-logic", "consistency/transitivity analysis");
    CommonOpts logic_opts;
    add_common(logic_cmd, &logic_opts);
    auto* counter_cmd =
        app.add_subcommand("eval-counterfactual", "counterfactual CP/RA/AA/SC analysis");
    CommonOpts counter_opts;
    add_common(counter_cmd, &counter_opts);

    // report-merge
    auto* merge_cmd = app.add_subcommand("report-merge", "join section reports into one");
    std::string merge_out;
    std::vector<std::string> merge_inputs;
    merge_cmd->add_option("--out", merge_out, "merged report path")->required();
    merge_cmd->add_option("inputs", merge_inputs, "section report files")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "execute all enabled analyses");
    CommonOpts run_opts;
    add_common(run_cmd, &run_opts);
    run_cmd->add_option("--analyses", run_opts.analyses,
                        "comma list: answers,explanations,robustness,logic,counterfactual");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (ingest_cmd->parsed()) {
        return dispatch([&] {
            std::vector<QaRecord> records;
            if (ingest_format == "canonical") {
                records = ingest(ingest_in);
            } else if (ingest_format == "menatqa") {
                records = convert_menatqa(ingest_in);
            } else {
                try {
                    records = ingest(ingest_in);
                } catch (const std::exception&) {
                    records = convert_menatqa(ingest_in);
                }
            }
            write_corpus(ingest_out, records);
            std::cout << "wrote " << records.size() << " records to " << ingest_out << "\n";
            return 0;
        });
    }
    if (perturb_cmd->parsed()) {
        return dispatch([&] {
            RunConfig cfg = build_config(perturb_cmd, perturb_opts);
            Pipeline pipeline(cfg, http_post_transport);
            pipeline.write_variant_corpus(parse_perturbation_kind(perturb_kind), perturb_out);
            std::cout << "wrote variant corpus to " << perturb_out << "\n";
            return 0;
        });
    }
    if (answers_cmd->parsed()) {
        return dispatch(
            [&] { return run_single_section(answers_cmd, answers_opts, Analysis::answers); });
    }
    if (explain_cmd->parsed()) {
        return dispatch([&] {
            return run_single_section(explain_cmd, explain_opts, Analysis::explanations);
        });
    }
    if (robx_cmd->parsed()) {
        return dispatch([&] {
            if (!robx_rows.empty()) {
                RunConfig cfg = build_config(robx_cmd, robx_opts);
                Pipeline pipeline(cfg);
                nlohmann::json report;
                report["sections"]["robustness"] = pipeline.robustness_from_rows(robx_rows);
                const auto out = cfg.output_dir / "robustness_section.json";
                detail::write_file(out, report.dump(2) + "\n");
                std::cout << "robustness (from rows): ok -> " << out.string() << "\n";
                return 0;
            }
            return run_single_section(robx_cmd, robx_opts, Analysis::robustness);
        });
    }
    if (logic_cmd->parsed()) {
        return dispatch(
            [&] { return run_single_section(logic_cmd, logic_opts, Analysis::logic); });
    }
    if (counter_cmd->parsed()) {
        return dispatch([&] {
            return run_single_section(counter_cmd, counter_opts, Analysis::counterfactual);
        });
    }
    if (merge_cmd->parsed()) {
        return dispatch([&] {
            std::vector<nlohmann::json> reports;
            for (const auto& path : merge_inputs) {
                reports.push_back(nlohmann::json::parse(detail::read_file(path)));
            }
            const auto merged = merge_reports(reports);
            detail::write_file(merge_out, merged.dump(2) + "\n");
            std::cout << "merged " << reports.size() << " reports into " << merge_out << "\n";
            return 0;
        });
    }
    if (run_cmd->parsed()) {
        return dispatch([&] {
            RunConfig cfg = build_config(run_cmd, run_opts);
            if (run_cmd->count("--analyses")) {
                cfg.analyses.clear();
                std::stringstream ss(run_opts.analyses);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (!detail::trim(item).empty()) {
                        cfg.analyses.insert(parse_analysis(detail::trim(item)));
                    }
                }
            }
            Pipeline pipeline(cfg, http_post_transport);
            const RunResult result = pipeline.run();
            for (const auto& [name, section] : result.report["sections"].items()) {
                std::cout << name << ": " << section["status"].get<std::string>();
                if (section["status"] != "ok") {
                    std::cout << " (" << section["error"].get<std::string>() << ")";
                }
                std::cout << "\n";
            }
            std::cout << "report: " << (cfg.output_dir / "report.json").string() << "\n";
            if (result.infra_failure) return 3;
            return result.all_ok ? 0 : 2;
        });
    }
    return 1;
}
