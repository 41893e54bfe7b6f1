#pragma once

/**
 * pipeline.hpp — run orchestration, report building, file emission.
 *
 * Analyses execute in a fixed order (answers, explanations, robustness,
 * logic, counterfactual). A failing analysis marks its own report section
 * failed and never poisons the others. Outputs carry no timestamps:
 * identical (config, corpus, cache) means byte-identical reports.
 *
 * File inventory per run (under output_dir):
 *   report.json                   structured report, meta + sections
 *   hop_distribution.csv          Fig-1-style category histogram, both modes
 *   answers.csv / answers_by_category.csv
 *   explanations.csv / explanations_by_category.csv
 *   robustness.csv                Table-1-shaped, ranked rows
 *   logic.csv / logic_by_category.csv / logic_edges.txt
 *   counterfactual.csv            Table-2-shaped metric/value rows
 *   counterfactual_difficulty.csv / counterfactual_pairs.jsonl
 * CSV/JSONL files start with a header line naming tool version, seed and
 * config hash; report.json carries the same fields in meta.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cotcheck/answer_metrics.hpp"
#include "cotcheck/corpus.hpp"
#include "cotcheck/counterfactual.hpp"
#include "cotcheck/detail/sha256.hpp"
#include "cotcheck/explain_audit.hpp"
#include "cotcheck/gateway.hpp"
#include "cotcheck/logic_graph.hpp"
#include "cotcheck/perturbation.hpp"
#include "cotcheck/textkit.hpp"
#include "cotcheck/version.hpp"

namespace cotcheck {

enum class Analysis { answers, explanations, robustness, logic, counterfactual };

inline const char* to_string(Analysis a) {
    switch (a) {
        case Analysis::answers: return "answers";
        case Analysis::explanations: return "explanations";
        case Analysis::robustness: return "robustness";
        case Analysis::logic: return "logic";
        case Analysis::counterfactual: return "counterfactual";
    }
    return "?";
}

inline Analysis parse_analysis(std::string_view name) {
    if (name == "answers") return Analysis::answers;
    if (name == "explanations") return Analysis::explanations;
    if (name == "robustness") return Analysis::robustness;
    if (name == "logic") return Analysis::logic;
    if (name == "counterfactual") return Analysis::counterfactual;
    throw std::invalid_argument("unknown analysis: " + std::string(name));
}

/// Fixed execution order.
inline const std::vector<Analysis>& all_analyses() {
    static const std::vector<Analysis> v = {Analysis::answers, Analysis::explanations,
                                            Analysis::robustness, Analysis::logic,
                                            Analysis::counterfactual};
    return v;
}

struct RunConfig {
    std::filesystem::path corpus_path;
    GatewayConfig gateway;
    std::uint64_t seed = 0;
    std::set<Analysis> analyses = {Analysis::answers, Analysis::explanations,
                                   Analysis::robustness, Analysis::logic,
                                   Analysis::counterfactual};
    std::filesystem::path output_dir = "out";
    CategorizeMode categorize_mode = CategorizeMode::question;
};

inline CategorizeMode parse_categorize_mode(std::string_view name) {
    if (name == "question") return CategorizeMode::question;
    if (name == "annotated") return CategorizeMode::annotated;
    throw std::invalid_argument("unknown categorize mode: " + std::string(name));
}

/// Flat key = value config file; '#' starts a comment. The API key may come
/// from the file but COTCHECK_API_KEY overrides it (secrets only).
inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        }
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string value = detail::trim(trimmed.substr(eq + 1));
        if (key == "corpus") {
            cfg.corpus_path = value;
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "analyses") {
            cfg.analyses.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const std::string name = detail::trim(item);
                if (!name.empty()) cfg.analyses.insert(parse_analysis(name));
            }
        } else if (key == "categorize_mode") {
            cfg.categorize_mode = parse_categorize_mode(value);
        } else if (key == "endpoint") {
            cfg.gateway.endpoint_url = value;
        } else if (key == "model") {
            cfg.gateway.model_id = value;
        } else if (key == "mode") {
            cfg.gateway.mode = parse_gateway_mode(value);
        } else if (key == "cache") {
            cfg.gateway.cache_path = value;
        } else if (key == "concurrency") {
            cfg.gateway.concurrency = std::stoi(value);
        } else if (key == "retry_cap") {
            cfg.gateway.retry_cap = std::stoi(value);
        } else if (key == "api_key") {
            cfg.gateway.api_key = value;
        } else {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
        }
    }
    if (const char* env_key = std::getenv("COTCHECK_API_KEY")) {
        cfg.gateway.api_key = env_key;
    }
    return cfg;
}

/// Deterministic config rendering; its SHA-256 is the config hash stamped on
/// every output. Only scoring-relevant inputs participate: the API key and
/// the output directory stay out.
inline std::string canonical_config_text(const RunConfig& cfg) {
    std::ostringstream out;
    std::vector<std::string> analyses;
    for (auto a : all_analyses()) {
        if (cfg.analyses.count(a)) analyses.push_back(to_string(a));
    }
    out << "analyses=";
    for (std::size_t i = 0; i < analyses.size(); ++i) out << (i ? "," : "") << analyses[i];
    out << "\ncache=" << cfg.gateway.cache_path.generic_string();
    out << "\ncategorize_mode=" << to_string(cfg.categorize_mode);
    out << "\nconcurrency=" << cfg.gateway.concurrency;
    out << "\ncorpus=" << cfg.corpus_path.generic_string();
    out << "\nendpoint=" << cfg.gateway.endpoint_url;
    out << "\nmode=" << to_string(cfg.gateway.mode);
    out << "\nmodel=" << cfg.gateway.model_id;
    out << "\nretry_cap=" << cfg.gateway.retry_cap;
    out << "\nseed=" << cfg.seed << "\n";
    return out.str();
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << content;
}

/// Fixed-precision rendering for CSV cells (reports use raw JSON doubles).
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// Index-parallel map with bounded workers; results land by index so
/// downstream aggregation is deterministic. The first worker exception is
/// rethrown after all workers join.
template <typename F>
void parallel_for(std::size_t n, int concurrency, F&& body) {
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, concurrency)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline nlohmann::json category_map_json(const std::map<HopCategory, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [cat, v] : m) j[to_string(cat)] = v;
    return j;
}

}  // namespace detail

struct RunResult {
    nlohmann::json report;
    bool all_ok = true;
    bool infra_failure = false;  // cache miss or transport failure in some section
};

class Pipeline {
  public:
    explicit Pipeline(RunConfig config, Transport transport = {})
        : cfg_(std::move(config)), client_(cfg_.gateway, std::move(transport)) {}

    const RunConfig& config() const { return cfg_; }

    const std::vector<QaRecord>& records() {
        ensure_loaded();
        return records_;
    }

    /// Header line stamped on every CSV/JSONL output.
    std::string file_header() const {
        return std::string("# cotcheck ") + kVersion + " seed=" + std::to_string(cfg_.seed) +
               " config=" + config_hash_ + "\n";
    }

    nlohmann::json header_json() const {
        return nlohmann::json{{"_header",
                               {{"tool", "cotcheck"},
                                {"version", kVersion},
                                {"seed", cfg_.seed},
                                {"config_hash", config_hash_}}}};
    }

    /// Executes the enabled analyses in fixed order and writes all files.
    RunResult run() {
        ensure_loaded();
        std::filesystem::create_directories(cfg_.output_dir);
        RunResult result;
        result.report["meta"] = make_meta();
        nlohmann::json& sections = result.report["sections"];
        write_hop_distribution();
        for (Analysis a : all_analyses()) {
            if (!cfg_.analyses.count(a)) continue;
            try {
                switch (a) {
                    case Analysis::answers: sections["answers"] = answers_section(); break;
                    case Analysis::explanations:
                        sections["explanations"] = explanations_section();
                        break;
                    case Analysis::robustness:
                        sections["robustness"] = robustness_section();
                        break;
                    case Analysis::logic: sections["logic"] = logic_section(); break;
                    case Analysis::counterfactual:
                        sections["counterfactual"] = counterfactual_section();
                        break;
                }
            } catch (const CacheMissError& e) {
                sections[to_string(a)] = failed_section(e.what(), "cache_miss");
                result.all_ok = false;
                result.infra_failure = true;
            } catch (const TransportError& e) {
                sections[to_string(a)] = failed_section(e.what(), "transport");
                result.all_ok = false;
                result.infra_failure = true;
            } catch (const std::exception& e) {
                sections[to_string(a)] = failed_section(e.what(), "analysis");
                result.all_ok = false;
            }
        }
        detail::write_file(cfg_.output_dir / "report.json", result.report.dump(2) + "\n");
        return result;
    }

    nlohmann::json answers_section() {
        ensure_loaded();
        const auto& traces = forward_traces();
        std::vector<AnswerScore> scores(records_.size());
        for (std::size_t i = 0; i < records_.size(); ++i) {
            scores[i] = score_answer(records_[i], traces[i]);
        }

        std::vector<std::pair<HopCategory, double>> em_items;
        std::vector<std::pair<HopCategory, double>> f1_items;
        std::vector<std::pair<HopCategory, double>> bleu_items;
        std::vector<std::pair<HopCategory, double>> cot_items;
        std::vector<std::pair<HopCategory, double>> soft_items;
        std::ostringstream csv;
        csv << file_header() << "id,category,em,f1,bleu,cot_em,mean_soft_step\n";
        std::size_t with_path = 0;
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const HopCategory cat = record_category(records_[i]);
            const auto& s = scores[i];
            em_items.emplace_back(cat, s.em);
            f1_items.emplace_back(cat, s.f1);
            bleu_items.emplace_back(cat, s.bleu);
            csv << records_[i].id << "," << to_string(cat) << "," << s.em << ","
                << detail::fmt(s.f1) << "," << detail::fmt(s.bleu) << ",";
            if (s.cot_em) {
                ++with_path;
                cot_items.emplace_back(cat, *s.cot_em);
                const double soft = mean_soft(s);
                soft_items.emplace_back(cat, soft);
                csv << *s.cot_em << "," << detail::fmt(soft) << "\n";
            } else {
                csv << ",\n";
            }
        }
        detail::write_file(cfg_.output_dir / "answers.csv", csv.str());

        nlohmann::json section;
        section["status"] = "ok";
        section["n"] = records_.size();
        section["n_with_gold_path"] = with_path;
        section["em"] = mean_of(em_items);
        section["f1"] = mean_of(f1_items);
        section["bleu"] = mean_of(bleu_items);
        if (with_path > 0) {
            section["cot_em"] = mean_of(cot_items);
            section["soft_step_similarity"] = mean_of(soft_items);
        }
        section["by_category"] = nlohmann::json{
            {"em", detail::category_map_json(aggregate_by_category(em_items))},
            {"f1", detail::category_map_json(aggregate_by_category(f1_items))},
            {"bleu", detail::category_map_json(aggregate_by_category(bleu_items))}};
        if (with_path > 0) {
            section["by_category"]["cot_em"] =
                detail::category_map_json(aggregate_by_category(cot_items));
            section["by_category"]["soft_step_similarity"] =
                detail::category_map_json(aggregate_by_category(soft_items));
        }
        write_by_category_csv("answers_by_category.csv", section["by_category"]);
        return section;
    }

    nlohmann::json explanations_section() {
        ensure_loaded();
        const auto& fwd = forward_traces();
        std::vector<ExplanationAudit> audits(records_.size());
        detail::parallel_for(records_.size(), cfg_.gateway.concurrency, [&](std::size_t i) {
            const std::string& answer = fwd[i].final_answer;
            std::vector<std::string> steps;
            if (!answer.empty()) {
                const auto trace =
                    parse_trace(client_.generate(prompt_explain(records_[i].question, answer)));
                steps = trace.steps.empty() ? split_sentences(trace.raw_text).sentences
                                            : trace.steps;
            }
            audits[i] = audit_explanation(records_[i].question, steps, answer);
        });

        std::vector<std::pair<HopCategory, ExplanationAudit>> items;
        std::ostringstream csv;
        csv << file_header() << "id,category,faithfulness,plausibility,hallucinated\n";
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const HopCategory cat = record_category(records_[i]);
            items.emplace_back(cat, audits[i]);
            csv << records_[i].id << "," << to_string(cat) << "," << audits[i].faithfulness
                << "," << audits[i].plausibility << "," << audits[i].hallucinated << "\n";
        }
        detail::write_file(cfg_.output_dir / "explanations.csv", csv.str());

        const AuditSummary summary = summarize(items);
        nlohmann::json section;
        section["status"] = "ok";
        section["n"] = summary.n;
        section["mean_faithfulness"] = summary.mean_f;
        section["mean_plausibility"] = summary.mean_p;
        section["hallucination_rate"] = summary.halluc_rate;
        section["plausibility_scale"] =
            "1-6 indicator count; not rescaled to the /5 convention";
        nlohmann::json by_cat = nlohmann::json::object();
        std::ostringstream cat_csv;
        cat_csv << file_header()
                << "category,n,mean_faithfulness,mean_plausibility,hallucination_rate\n";
        for (const auto& [cat, stats] : summary.per_category) {
            by_cat[to_string(cat)] = {{"n", stats.n},
                                      {"mean_faithfulness", stats.mean_f},
                                      {"mean_plausibility", stats.mean_p},
                                      {"hallucination_rate", stats.halluc_rate}};
            cat_csv << to_string(cat) << "," << stats.n << "," << detail::fmt(stats.mean_f)
                    << "," << detail::fmt(stats.mean_p) << ","
                    << detail::fmt(stats.halluc_rate) << "\n";
        }
        section["by_category"] = by_cat;
        detail::write_file(cfg_.output_dir / "explanations_by_category.csv", cat_csv.str());
        return section;
    }

    nlohmann::json robustness_section() {
        ensure_loaded();
        const auto& base_traces = forward_traces();
        const AggregateScores baseline = aggregate_scores(base_traces);

        std::map<PerturbationKind, RobustnessRow> rows;
        for (std::size_t k = 0; k < all_perturbation_kinds().size(); ++k) {
            const PerturbationKind kind = all_perturbation_kinds()[k];
            std::vector<ReasoningTrace> variant_traces(records_.size());
            detail::parallel_for(
                records_.size(), cfg_.gateway.concurrency, [&](std::size_t i) {
                    const auto variant = perturb(records_[i].question, kind,
                                                 record_seed(records_[i].id, k),
                                                 records_[i].id);
                    variant_traces[i] =
                        parse_trace(client_.generate(prompt_forward(variant.perturbed_question)));
                });
            const AggregateScores variant = aggregate_scores(variant_traces);
            rows[kind] = robustness_row(baseline, variant,
                                        sem_sim(base_traces, variant_traces),
                                        reason_sim(base_traces, variant_traces));
        }
        const auto ranked = rank_variants(rows);
        detail::write_file(cfg_.output_dir / "robustness.csv", robustness_csv(ranked));

        nlohmann::json section;
        section["status"] = "ok";
        section["n"] = records_.size();
        nlohmann::json jrows = nlohmann::json::object();
        nlohmann::json ranking = nlohmann::json::array();
        for (const auto& [kind, row] : ranked) {
            ranking.push_back(to_string(kind));
            jrows[to_string(kind)] = {{"em_drop", row.em_drop},
                                      {"cot_drop", row.cot_drop},
                                      {"sem_sim", row.sem_sim},
                                      {"reason_sim", row.reason_sim},
                                      {"conf_degradation", row.conf_degradation},
                                      {"robustness", row.robustness},
                                      {"baseline_em", row.baseline_em},
                                      {"variant_em", row.variant_em},
                                      {"baseline_cot", row.baseline_cot},
                                      {"variant_cot", row.variant_cot}};
        }
        section["rows"] = jrows;
        section["ranking"] = ranking;
        return section;
    }

    nlohmann::json logic_section() {
        ensure_loaded();
        const auto& fwd = forward_traces();
        std::vector<ReasoningTrace> bwd(records_.size());
        detail::parallel_for(records_.size(), cfg_.gateway.concurrency, [&](std::size_t i) {
            bwd[i] = parse_trace(client_.generate(prompt_backward(records_[i].gold_answer)));
        });

        std::vector<ConsistencyResult> results(records_.size());
        std::ostringstream csv;
        std::ostringstream edges;
        csv << file_header()
            << "id,category,consistency,transitivity,flow_transitivity,forward_len,"
               "backward_len\n";
        edges << file_header();
        std::vector<std::pair<HopCategory, double>> cons_items;
        std::vector<std::pair<HopCategory, double>> trans_items;
        std::vector<std::pair<HopCategory, double>> flow_items;
        double fwd_len_sum = 0;
        double bwd_len_sum = 0;
        for (std::size_t i = 0; i < records_.size(); ++i) {
            results[i] = evaluate_pair(fwd[i], bwd[i], record_hop_value(records_[i]));
            const auto& r = results[i];
            cons_items.emplace_back(r.category, r.consistency);
            trans_items.emplace_back(r.category, r.transitivity);
            flow_items.emplace_back(r.category, r.flow_transitivity);
            fwd_len_sum += static_cast<double>(r.forward_len);
            bwd_len_sum += static_cast<double>(r.backward_len);
            csv << records_[i].id << "," << to_string(r.category) << ","
                << detail::fmt(r.consistency) << "," << detail::fmt(r.transitivity) << ","
                << detail::fmt(r.flow_transitivity) << "," << r.forward_len << ","
                << r.backward_len << "\n";
            edges << "# record " << records_[i].id << "\n"
                  << to_edge_list(build_graph(extract_logical_forms(fwd[i].steps)));
        }
        detail::write_file(cfg_.output_dir / "logic.csv", csv.str());
        detail::write_file(cfg_.output_dir / "logic_edges.txt", edges.str());

        nlohmann::json section;
        section["status"] = "ok";
        section["n"] = records_.size();
        const double n = static_cast<double>(records_.size());
        section["overall_consistency"] = mean_of(cons_items);
        section["overall_transitivity"] = mean_of(flow_items);  // E[T-hat]
        section["mean_plain_transitivity"] = mean_of(trans_items);
        // unweighted mean of the two components; artifact convention, the
        // combination is not pinned anywhere authoritative
        section["overall_reasoning"] = 0.5 * (mean_of(cons_items) + mean_of(flow_items));
        section["overall_reasoning_note"] =
            "artifact_convention: unweighted mean of overall_consistency and "
            "overall_transitivity";
        section["mean_forward_len"] = fwd_len_sum / n;
        section["mean_backward_len"] = bwd_len_sum / n;
        section["by_category"] = nlohmann::json{
            {"consistency", detail::category_map_json(aggregate_by_category(cons_items))},
            {"transitivity", detail::category_map_json(aggregate_by_category(trans_items))},
            {"flow_transitivity",
             detail::category_map_json(aggregate_by_category(flow_items))}};
        write_by_category_csv("logic_by_category.csv", section["by_category"]);
        return section;
    }

    nlohmann::json counterfactual_section() {
        ensure_loaded();
        const auto& fwd = forward_traces();

        struct Planned {
            std::size_t record_index;
            ModifiedQuestion modified;
        };
        std::vector<Planned> planned;
        std::size_t skipped = 0;
        for (std::size_t i = 0; i < records_.size(); ++i) {
            if (auto m = plan_modification(records_[i].question)) {
                planned.push_back({i, std::move(*m)});
            } else {
                ++skipped;
            }
        }
        if (planned.empty()) {
            throw std::runtime_error("counterfactual: no record has a modifiable span");
        }

        std::vector<ReasoningTrace> variant_traces(planned.size());
        detail::parallel_for(planned.size(), cfg_.gateway.concurrency, [&](std::size_t i) {
            variant_traces[i] =
                parse_trace(client_.generate(prompt_forward(planned[i].modified.question)));
        });

        std::vector<CounterfactualPair> pairs;
        std::vector<HopCategory> cats_question;
        std::vector<HopCategory> cats_annotated;
        std::ostringstream dump;
        dump << header_json().dump() << "\n";
        for (std::size_t i = 0; i < planned.size(); ++i) {
            const auto& rec = records_[planned[i].record_index];
            CounterfactualPair p = score_pair(rec, planned[i].modified,
                                              fwd[planned[i].record_index],
                                              variant_traces[i], std::nullopt);
            cats_question.push_back(categorize_record(rec, CategorizeMode::question));
            cats_annotated.push_back(categorize_record(rec, CategorizeMode::annotated));
            dump << pair_json(p).dump() << "\n";
            pairs.push_back(std::move(p));
        }
        detail::write_file(cfg_.output_dir / "counterfactual_pairs.jsonl", dump.str());

        const CounterfactualRates rates = aggregate_rates(pairs, cats_question);
        const CounterfactualRates rates_annotated = aggregate_rates(pairs, cats_annotated);

        std::ostringstream csv;
        csv << file_header() << "metric,value\n";
        csv << "Total Pairs," << rates.n << "\n";
        csv << "Change Propagation Rate," << detail::fmt(rates.cp_rate) << "\n";
        csv << "Reasoning Adaptation Rate," << detail::fmt(rates.ra_rate) << "\n";
        csv << "Answer Adjustment Rate," << detail::fmt(rates.aa_rate) << "\n";
        csv << "Average Step Consistency," << detail::fmt(rates.mean_sc) << "\n";
        detail::write_file(cfg_.output_dir / "counterfactual.csv", csv.str());

        std::ostringstream diff_csv;
        diff_csv << file_header() << "mode,category,difficulty\n";
        for (const auto& [cat, d] : rates.difficulty) {
            diff_csv << "question," << to_string(cat) << "," << detail::fmt(d) << "\n";
        }
        for (const auto& [cat, d] : rates_annotated.difficulty) {
            diff_csv << "annotated," << to_string(cat) << "," << detail::fmt(d) << "\n";
        }
        detail::write_file(cfg_.output_dir / "counterfactual_difficulty.csv", diff_csv.str());

        nlohmann::json section;
        section["status"] = "ok";
        section["total_pairs"] = rates.n;
        section["skipped_not_modifiable"] = skipped;
        section["cp_rate"] = rates.cp_rate;
        section["ra_rate"] = rates.ra_rate;
        section["aa_rate"] = rates.aa_rate;
        section["mean_step_consistency"] = rates.mean_sc;
        section["aa_mode"] = "heuristic";  // no arithmetic oracle for free-form corpora
        section["difficulty"] = nlohmann::json{
            {"question", detail::category_map_json(rates.difficulty)},
            {"annotated", detail::category_map_json(rates_annotated.difficulty)}};
        return section;
    }

    /// Table-1-shaped robustness arithmetic on precomputed aggregate rows,
    /// no generation involved. CSV columns:
    ///   kind,baseline_em,variant_em,baseline_cot,variant_cot,sem_sim,
    ///   reason_sim,baseline_conf,variant_conf
    nlohmann::json robustness_from_rows(const std::filesystem::path& rows_csv) {
        ensure_hashes();
        std::ifstream in(rows_csv);
        if (!in) throw std::runtime_error("cannot open rows file: " + rows_csv.string());
        std::map<PerturbationKind, RobustnessRow> rows;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string trimmed = detail::trim(line);
            if (trimmed.empty() || trimmed[0] == '#' || trimmed.rfind("kind,", 0) == 0) continue;
            std::vector<std::string> cells;
            std::stringstream ss(trimmed);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(detail::trim(cell));
            if (cells.size() != 9) {
                throw std::runtime_error("rows file line " + std::to_string(line_no) +
                                         ": expected 9 columns");
            }
            const PerturbationKind kind = parse_perturbation_kind(cells[0]);
            const AggregateScores baseline{std::stod(cells[1]), std::stod(cells[3]),
                                           std::stod(cells[7])};
            const AggregateScores variant{std::stod(cells[2]), std::stod(cells[4]),
                                          std::stod(cells[8])};
            rows[kind] = robustness_row(baseline, variant, std::stod(cells[5]),
                                        std::stod(cells[6]));
        }
        const auto ranked = rank_variants(rows);
        std::filesystem::create_directories(cfg_.output_dir);
        detail::write_file(cfg_.output_dir / "robustness.csv", robustness_csv(ranked));
        nlohmann::json section;
        section["status"] = "ok";
        nlohmann::json jrows = nlohmann::json::object();
        nlohmann::json ranking = nlohmann::json::array();
        for (const auto& [kind, row] : ranked) {
            ranking.push_back(to_string(kind));
            jrows[to_string(kind)] = {{"em_drop", row.em_drop},
                                      {"cot_drop", row.cot_drop},
                                      {"sem_sim", row.sem_sim},
                                      {"reason_sim", row.reason_sim},
                                      {"conf_degradation", row.conf_degradation},
                                      {"robustness", row.robustness},
                                      {"baseline_em", row.baseline_em},
                                      {"variant_em", row.variant_em},
                                      {"baseline_cot", row.baseline_cot},
                                      {"variant_cot", row.variant_cot}};
        }
        section["rows"] = jrows;
        section["ranking"] = ranking;
        return section;
    }

    /// Variant corpus for one perturbation kind (the `perturb` subcommand).
    void write_variant_corpus(PerturbationKind kind, const std::filesystem::path& out_path) {
        ensure_loaded();
        const std::size_t kind_index =
            static_cast<std::size_t>(std::find(all_perturbation_kinds().begin(),
                                               all_perturbation_kinds().end(), kind) -
                                     all_perturbation_kinds().begin());
        std::ostringstream out;
        out << header_json().dump() << "\n";
        for (const auto& rec : records_) {
            const auto variant =
                perturb(rec.question, kind, record_seed(rec.id, kind_index), rec.id);
            nlohmann::json j = to_json(rec);
            j["id"] = rec.id + "#" + to_string(kind);
            j["question"] = variant.perturbed_question;
            j["kind"] = to_string(kind);
            j["seed"] = variant.seed;
            j["original_id"] = rec.id;
            out << j.dump() << "\n";
        }
        detail::write_file(out_path, out.str());
    }

    /// Meta block shared by run() and the single-section subcommands.
    nlohmann::json make_meta() {
        ensure_loaded();
        nlohmann::json meta;
        meta["tool"] = "cotcheck";
        meta["version"] = kVersion;
        meta["seed"] = cfg_.seed;
        meta["config_hash"] = config_hash_;
        meta["corpus_hash"] = corpus_hash_;
        meta["n_records"] = records_.size();
        meta["categorize_mode"] = to_string(cfg_.categorize_mode);
        meta["gateway_mode"] = to_string(cfg_.gateway.mode);
        meta["model_id"] = cfg_.gateway.model_id;
        nlohmann::json analyses = nlohmann::json::array();
        for (auto a : all_analyses()) {
            if (cfg_.analyses.count(a)) analyses.push_back(to_string(a));
        }
        meta["analyses"] = analyses;
        return meta;
    }

  private:
    void ensure_hashes() {
        if (config_hash_.empty()) {
            config_hash_ = detail::sha256_hex(canonical_config_text(cfg_)).substr(0, 16);
        }
    }

    void ensure_loaded() {
        ensure_hashes();
        if (!records_.empty()) return;
        records_ = ingest(cfg_.corpus_path);
        if (records_.empty()) {
            throw std::runtime_error("corpus is empty: " + cfg_.corpus_path.string());
        }
        corpus_hash_ = detail::sha256_hex(detail::read_file(cfg_.corpus_path)).substr(0, 16);
    }

    const std::vector<ReasoningTrace>& forward_traces() {
        if (!forward_traces_) {
            std::vector<ReasoningTrace> traces(records_.size());
            detail::parallel_for(records_.size(), cfg_.gateway.concurrency,
                                 [&](std::size_t i) {
                                     traces[i] = parse_trace(client_.generate(
                                         prompt_forward(records_[i].question)));
                                 });
            forward_traces_ = std::move(traces);
        }
        return *forward_traces_;
    }

    HopCategory record_category(const QaRecord& r) const {
        return categorize_record(r, cfg_.categorize_mode);
    }

    /// Annotated-hop input for Eq.-complexity style bucketing.
    static int record_hop_value(const QaRecord& r) {
        if (r.annotated_hops) return *r.annotated_hops;
        return static_cast<int>(
            std::floor(hop_complexity(r.question, r.time_scope.has_value())));
    }

    std::uint64_t record_seed(const std::string& id, std::size_t kind_index) const {
        return detail::derive_seed(cfg_.seed ^ detail::fnv1a64(id), 100 + kind_index);
    }

    AggregateScores aggregate_scores(const std::vector<ReasoningTrace>& traces) {
        AggregateScores agg;
        double cot_sum = 0;
        std::size_t cot_n = 0;
        for (std::size_t i = 0; i < records_.size(); ++i) {
            agg.em += exact_match(traces[i].final_answer, records_[i].gold_answer);
            if (records_[i].gold_path) {
                cot_sum += cot_exact_match(traces[i].steps, *records_[i].gold_path);
                ++cot_n;
            }
            agg.confidence += confidence(traces[i]);
        }
        const double n = static_cast<double>(records_.size());
        agg.em /= n;
        agg.confidence /= n;
        agg.cot_em = cot_n ? cot_sum / static_cast<double>(cot_n) : 0.0;
        return agg;
    }

    static double mean_soft(const AnswerScore& s) {
        if (s.soft_step_sims.empty()) return 0.0;
        double sum = 0;
        for (double v : s.soft_step_sims) sum += v;
        return sum / static_cast<double>(s.soft_step_sims.size());
    }

    static double mean_of(const std::vector<std::pair<HopCategory, double>>& items) {
        double sum = 0;
        for (const auto& [c, v] : items) sum += v;
        return items.empty() ? 0.0 : sum / static_cast<double>(items.size());
    }

    /// Default strategy ladder: first applicable of percentage +10%,
    /// temporal +5, absolute +5, multiplier x2.
    static std::optional<ModifiedQuestion> plan_modification(const std::string& question) {
        static const std::vector<std::pair<Strategy, double>> ladder = {
            {Strategy::percentage, 0.10},
            {Strategy::temporal, 5.0},
            {Strategy::absolute_change, 5.0},
            {Strategy::multiplier, 2.0}};
        for (const auto& [strategy, delta] : ladder) {
            try {
                return apply_modification(question, strategy, delta);
            } catch (const NotModifiableError&) {
                continue;
            }
        }
        return std::nullopt;
    }

    std::string robustness_csv(
        const std::vector<std::pair<PerturbationKind, RobustnessRow>>& ranked) {
        std::ostringstream csv;
        csv << file_header()
            << "kind,em_drop,cot_drop,sem_sim,reason_sim,conf_degradation,robustness,"
               "baseline_em,variant_em,baseline_cot,variant_cot\n";
        for (const auto& [kind, row] : ranked) {
            csv << to_string(kind) << "," << detail::fmt(row.em_drop) << ","
                << detail::fmt(row.cot_drop) << "," << detail::fmt(row.sem_sim) << ","
                << detail::fmt(row.reason_sim) << "," << detail::fmt(row.conf_degradation)
                << "," << detail::fmt(row.robustness) << "," << detail::fmt(row.baseline_em)
                << "," << detail::fmt(row.variant_em) << "," << detail::fmt(row.baseline_cot)
                << "," << detail::fmt(row.variant_cot) << "\n";
        }
        return csv.str();
    }

    void write_by_category_csv(const std::string& filename, const nlohmann::json& by_cat) {
        std::ostringstream csv;
        csv << file_header() << "metric,category,value\n";
        for (const auto& [metric, cats] : by_cat.items()) {
            for (const auto& [cat, v] : cats.items()) {
                csv << metric << "," << cat << "," << detail::fmt(v.get<double>()) << "\n";
            }
        }
        detail::write_file(cfg_.output_dir / filename, csv.str());
    }

    void write_hop_distribution() {
        std::map<std::pair<std::string, HopCategory>, std::size_t> hist;
        for (const auto& r : records_) {
            ++hist[{"question", categorize_record(r, CategorizeMode::question)}];
            ++hist[{"annotated", categorize_record(r, CategorizeMode::annotated)}];
        }
        std::ostringstream csv;
        csv << file_header() << "mode,category,count\n";
        for (const char* mode : {"question", "annotated"}) {
            for (auto cat : all_hop_categories()) {
                const auto it = hist.find({mode, cat});
                csv << mode << "," << to_string(cat) << ","
                    << (it == hist.end() ? 0 : it->second) << "\n";
            }
        }
        detail::write_file(cfg_.output_dir / "hop_distribution.csv", csv.str());
    }

    static nlohmann::json failed_section(const std::string& error, const std::string& kind) {
        return nlohmann::json{{"status", "failed"}, {"error", error}, {"error_kind", kind}};
    }

    nlohmann::json pair_json(const CounterfactualPair& p) const {
        nlohmann::json j;
        j["id"] = p.id;
        j["original_question"] = p.original_question;
        j["variant_question"] = p.variant_question;
        j["modification"] = {{"strategy", to_string(p.modification.strategy)},
                             {"magnitude", p.modification.magnitude},
                             {"target_text", p.modification.target.text},
                             {"target_begin", p.modification.target.begin},
                             {"target_kind", to_string(p.modification.target.kind)},
                             {"new_value", p.modification.new_value}};
        j["cp"] = p.cp;
        j["ra"] = p.ra;
        j["aa"] = p.aa;
        j["sc"] = p.sc;
        j["aa_oracle"] = p.aa_oracle;
        j["traces_differ"] = p.traces_differ;
        j["value_in_reasoning"] = p.value_in_reasoning;
        j["original_answer"] = p.original_trace.final_answer;
        j["variant_answer"] = p.variant_trace.final_answer;
        return j;
    }

    RunConfig cfg_;
    GenerationClient client_;
    std::vector<QaRecord> records_;
    std::optional<std::vector<ReasoningTrace>> forward_traces_;
    std::string corpus_hash_;
    std::string config_hash_;
};

/// Joins section report files into one report. Sections must be disjoint.
inline nlohmann::json merge_reports(const std::vector<nlohmann::json>& reports) {
    if (reports.empty()) throw std::invalid_argument("merge_reports: nothing to merge");
    nlohmann::json merged;
    merged["meta"] = reports.front().value("meta", nlohmann::json::object());
    merged["meta"]["merged_from"] = reports.size();
    nlohmann::json& sections = merged["sections"];
    sections = nlohmann::json::object();
    for (const auto& r : reports) {
        if (!r.contains("sections")) continue;
        for (const auto& [name, body] : r["sections"].items()) {
            if (sections.contains(name)) {
                throw std::runtime_error("merge_reports: duplicate section '" + name + "'");
            }
            sections[name] = body;
        }
    }
    return merged;
}

}  // namespace cotcheck
