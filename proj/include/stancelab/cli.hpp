// Command-line surface: config resolution, run directories, run manifests and
// the verbs preprocess, pretrain, finetune, cross-target, ablate, similarity,
// report and gradcheck.
#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stancelab/corpus.hpp"
#include "stancelab/eval.hpp"
#include "stancelab/gradcheck.hpp"
#include "stancelab/model.hpp"
#include "stancelab/pipeline.hpp"
#include "stancelab/textprep.hpp"
#include "stancelab/util.hpp"

namespace stancelab::cli {

inline constexpr const char* kToolName = "stancelab";
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Everything a command can be configured with.
struct RunConfig {
    ExperimentSpec spec;
    std::vector<std::string> variants;  // ablation rows; empty = the six default rows
    std::string checkpoint;             // pretrained checkpoint directory

    /// Returns false for manifest bookkeeping keys, which are accepted and ignored.
    bool set(const std::string& key, const std::string& value) {
        if (key == "tool" || key == "version" || key == "verb" || key == "status" || key.rfind("fingerprint.", 0) == 0)
            return false;
        auto& s = spec;
        if (key == "task") s.task = parse_task(value);
        else if (key == "data") s.data = value;
        else if (key == "test_data") s.test_data = value;
        else if (key == "target") s.target = value;
        else if (key == "sarcasm") s.sarcasm = value;
        else if (key == "intermediate_name") s.intermediate_name = value;
        else if (key == "pretrain") s.pretrain = detail::parse_flag(key, value);
        else if (key == "seeds" || key == "seed") {
            s.seeds.clear();
            for (auto& part : split(value, ','))
                if (!trim(part).empty()) s.seeds.push_back(detail::parse_size(key, std::string(trim(part))));
            if (s.seeds.empty()) throw ConfigError("config key '" + key + "': no seeds given");
        } else if (key == "lexicon") s.lexicon = value;
        else if (key == "replacements") s.replacements = value;
        else if (key == "embeddings") s.embeddings = value;
        else if (key == "vocab_max") s.vocab_max = detail::parse_size(key, value);
        else if (key == "vocab_min_count") s.vocab_min_count = detail::parse_size(key, value);
        else if (key == "jobs") s.jobs = detail::parse_size(key, value);
        else if (key == "classical_mode") s.normalizer.classical_mode = detail::parse_flag(key, value);
        else if (key == "squeeze_len") s.normalizer.squeeze_len = detail::parse_size(key, value);
        else if (key == "url_token") s.normalizer.url_token = value;
        else if (key == "user_token") s.normalizer.user_token = value;
        else if (key == "variants") {
            variants.clear();
            for (auto& part : split(value, ','))
                if (!trim(part).empty()) variants.emplace_back(trim(part));
        } else if (key == "checkpoint") checkpoint = value;
        else if (!s.model.set(key, value) && !s.train.set(key, value))
            throw ConfigError("unknown config key '" + key + "'");
        return true;
    }

    std::vector<std::pair<std::string, std::string>> to_pairs() const {
        const auto& s = spec;
        std::string seeds;
        for (std::size_t i = 0; i < s.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(s.seeds[i]);
        std::vector<std::pair<std::string, std::string>> out{
            {"task", task_name(s.task)},
            {"data", s.data},
            {"test_data", s.test_data},
            {"target", s.target},
            {"sarcasm", s.sarcasm},
            {"intermediate_name", s.intermediate_name},
            {"pretrain", s.pretrain ? "1" : "0"},
            {"seeds", seeds},
            {"lexicon", s.lexicon},
            {"replacements", s.replacements},
            {"embeddings", s.embeddings},
            {"checkpoint", checkpoint},
            {"variants", join(variants, ",")},
            {"vocab_max", std::to_string(s.vocab_max)},
            {"vocab_min_count", std::to_string(s.vocab_min_count)},
            {"jobs", std::to_string(s.jobs)},
            {"classical_mode", s.normalizer.classical_mode ? "1" : "0"},
            {"squeeze_len", std::to_string(s.normalizer.squeeze_len)},
            {"url_token", s.normalizer.url_token},
            {"user_token", s.normalizer.user_token}};
        for (auto& kv : s.model.to_pairs()) out.push_back(kv);
        for (auto& kv : s.train.to_pairs()) out.push_back(kv);
        return out;
    }
};

/// `key<TAB>value` lines; blank lines and `#` comments skipped.
inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        auto tab = lines[i].find('\t');
        if (tab == std::string::npos)
            throw ConfigError(path.string() + " line " + std::to_string(i + 1) + ": expected key<TAB>value");
        cfg.set(std::string(trim(std::string_view(lines[i]).substr(0, tab))), lines[i].substr(tab + 1));
    }
}

/// `k=v`; applied in order, so the last assignment of a key wins.
inline void apply_override(RunConfig& cfg, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
}

/// Content fingerprint of a file, or of a directory's regular files in name order.
inline std::string fingerprint(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) return "missing";
    if (!fs::is_directory(path)) return hex64(fnv1a(read_file(path)));
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(path))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string acc;
    for (auto& f : files) acc += f.filename().string() + '\0' + read_file(f) + '\0';
    return hex64(fnv1a(acc));
}

/// manifest.tsv: tool, version, verb, status, every resolved key and the
/// fingerprints of all input files. Usable as a --config for a re-run.
inline void emit_run_manifest(const std::filesystem::path& rundir, const std::string& verb, const RunConfig& cfg,
                              const std::string& status) {
    std::string out = std::string("tool\t") + kToolName + "\nversion\t" + kVersion + "\nverb\t" + verb + "\nstatus\t" +
                      status + '\n';
    for (auto& [k, v] : cfg.to_pairs()) out += k + '\t' + v + '\n';
    const std::pair<const char*, const std::string*> inputs[] = {
        {"data", &cfg.spec.data},         {"test_data", &cfg.spec.test_data},   {"sarcasm", &cfg.spec.sarcasm},
        {"lexicon", &cfg.spec.lexicon},   {"replacements", &cfg.spec.replacements},
        {"embeddings", &cfg.spec.embeddings}, {"checkpoint", &cfg.checkpoint}};
    for (auto& [key, path] : inputs)
        if (!path->empty()) out += std::string("fingerprint.") + key + '\t' + fingerprint(*path) + '\n';
    write_file(rundir / "manifest.tsv", out);
}

/// `--out` when given, else `$STANCELAB_RUNDIR/<verb>`, else `runs/<verb>`.
inline std::filesystem::path resolve_rundir(const std::string& out, const std::string& verb) {
    if (!out.empty()) return out;
    if (const char* root = std::getenv("STANCELAB_RUNDIR"); root && *root) return std::filesystem::path(root) / verb;
    return std::filesystem::path("runs") / verb;
}

namespace detail {

inline std::string run_name(const std::string& target, std::uint64_t seed) {
    return target + "-seed" + std::to_string(seed);
}

inline std::shared_ptr<const Net> load_pretrained(const std::string& dir, ExperimentData& d) {
    auto net = std::make_shared<const Net>(load_checkpoint<float>(dir));
    const auto vocab_path = std::filesystem::path(dir) / "vocab.tsv";
    if (net->config().encoder_kind == EncoderKind::TrainableEmbedding) {
        if (!std::filesystem::exists(vocab_path)) throw DataError("checkpoint: missing " + vocab_path.string());
        d.text.vocab = Vocab::load(vocab_path);
        if (d.text.vocab.size() != net->config().vocab_size)
            throw DataError("checkpoint: vocab.tsv has " + std::to_string(d.text.vocab.size()) +
                            " entries, model expects " + std::to_string(net->config().vocab_size));
    }
    return net;
}

/// Loads inputs and the vocabulary (from the checkpoint when one is given).
inline ExperimentData prepare(RunConfig& cfg) {
    ExperimentData d = load_experiment_data(cfg.spec);
    if (!cfg.checkpoint.empty()) {
        d.pretrained = load_pretrained(cfg.checkpoint, d);
        if (cfg.spec.intermediate_name.empty())
            cfg.spec.intermediate_name = d.sarcasm ? d.sarcasm->name : std::string("pretrained");
    } else {
        build_experiment_vocab(d, cfg.spec);
    }
    return d;
}

inline std::string intermediate_of(const ExperimentData& d, const ExperimentSpec& spec) {
    if (!spec.intermediate_name.empty()) return spec.intermediate_name;
    return d.sarcasm ? d.sarcasm->name : std::string();
}

inline void write_runs(const std::filesystem::path& rundir, const ExperimentResult& r) {
    for (const auto& run : r.runs) {
        const std::string name = run_name(run.target, run.seed) + ".tsv";
        write_file(rundir / "predictions" / name, format_records_tsv(run.eval.records));
        write_file(rundir / "failures" / name, format_records_tsv(failure_report(run.eval)));
        write_file(rundir / "history" / name, format_history_tsv(run.history));
    }
}

inline std::string encoder_row(const ModelConfig& m) {
    return m.encoder_kind == EncoderKind::TrainableEmbedding ? "Ours-Embedding" : "Ours-Precomputed";
}

}  // namespace detail

/// Dispatcher state shared by the verbs.
struct Context {
    std::string verb;
    RunConfig cfg;
    std::filesystem::path rundir;
    std::ostream* out = &std::cout;
};

inline void cmd_preprocess(Context& c) {
    ExperimentData d = detail::prepare(c.cfg);
    if (!d.stance.targets.empty()) {
        std::string out = "id\ttarget\ttext\tlabel\tsplit\n";
        for (const auto& t : d.stance.targets)
            for (Split s : {Split::Train, Split::Test})
                for (const auto& r : d.stance.partition(t, s))
                    out += r.id + '\t' + t + '\t' + tsv_escape(d.text.clean(r.text)) + '\t' +
                           label_name(std::get<StanceLabel>(r.label)) + '\t' + split_name(s) + '\n';
        write_file(c.rundir / "stance.tsv", out);
    }
    if (d.sarcasm) {
        auto rows = d.sarcasm->samples;
        for (auto& r : rows) r.text = d.text.clean(r.text);
        write_file(c.rundir / "sarcasm.tsv", format_sarcasm_tsv(rows));
    }
    d.text.vocab.save(c.rundir / "vocab.tsv");
    *c.out << "preprocess: " << d.stance.size() << " stance rows (" << d.stance.dropped_rows << " dropped), vocab "
           << d.text.vocab.size() << " -> " << c.rundir.string() << '\n';
}

inline void cmd_pretrain(Context& c) {
    ExperimentData d = detail::prepare(c.cfg);
    if (!d.sarcasm) throw ConfigError("pretrain: config key 'sarcasm' is required");
    ModelConfig mc = c.cfg.spec.model;
    if (mc.encoder_kind == EncoderKind::TrainableEmbedding) mc.vocab_size = d.text.vocab.size();
    std::string summary = "seed\tused_cv\tchosen_fold\tval_accuracy\n";
    for (auto seed : c.cfg.spec.seeds) {
        auto res = pretrain_intermediate(d.sarcasm->samples, d.text, mc, c.cfg.spec.train, seed);
        const auto dir = c.rundir / "checkpoints" / ("seed" + std::to_string(seed));
        save_checkpoint(res.model, dir);
        d.text.vocab.save(dir / "vocab.tsv");
        for (std::size_t f = 0; f < res.histories.size(); ++f)
            write_file(c.rundir / "history" / ("seed" + std::to_string(seed) + "-fold" + std::to_string(f) + ".tsv"),
                       format_history_tsv(res.histories[f]));
        summary += std::to_string(seed) + '\t' + (res.used_cv ? "1" : "0") + '\t' + std::to_string(res.chosen_fold) +
                   '\t' + format_fixed(res.val_accuracy, 6) + '\n';
        *c.out << "pretrain: seed " << seed << " val accuracy " << format_fixed(res.val_accuracy, 4) << " -> "
               << dir.string() << '\n';
    }
    write_file(c.rundir / "pretrain.tsv", summary);
}

inline void cmd_experiment(Context& c, Task task) {
    c.cfg.spec.task = task;
    ExperimentData d = detail::prepare(c.cfg);
    ExperimentResult r = run_experiment(d, c.cfg.spec);
    detail::write_runs(c.rundir, r);
    write_file(c.rundir / "results.tsv", format_results_tsv({r}));

    const std::string inter = detail::intermediate_of(d, c.cfg.spec);
    const bool pretrained = c.cfg.spec.pretrain && (d.sarcasm || d.pretrained);
    TableKind kind = task == Task::CrossTarget ? TableKind::CrossTarget
                     : pretrained              ? TableKind::IntermediateTasks
                                               : TableKind::InDomain;
    std::vector<std::string> targets;
    for (const auto& a : r.aggregates) targets.push_back(a.target);
    ResultTable table = make_table(kind, {{d.stance.name, targets}});
    std::string row = kind == TableKind::CrossTarget        ? std::string("Ours")
                      : kind == TableKind::IntermediateTasks ? inter
                                                             : detail::encoder_row(c.cfg.spec.model);
    add_result(table, row, d.stance.name, r);
    write_file(c.rundir / "table.tsv", table.to_tsv());
    for (const auto& a : r.aggregates)
        *c.out << task_name(task) << ": " << r.variant << " " << a.target << " macro-F1 " << format_fixed(a.mean, 4)
               << " +- " << format_fixed(a.stdev, 4) << " (n=" << a.n << ")\n";
}

inline void cmd_ablate(Context& c) {
    ExperimentData d = detail::prepare(c.cfg);
    const std::string inter = detail::intermediate_of(d, c.cfg.spec);
    std::vector<AblationVariant> grid;
    for (const auto& v : c.cfg.variants) grid.push_back(parse_variant(v, inter));
    if (grid.empty()) grid = default_ablation_grid();
    std::vector<ExperimentResult> results;
    ResultTable table = run_ablation({{&d, c.cfg.spec}}, grid, &results);
    for (const auto& r : results) {
        const auto sub = c.rundir / "variants" / r.variant;
        detail::write_runs(sub, r);
    }
    write_file(c.rundir / "results.tsv", format_results_tsv(results));
    write_file(c.rundir / "table.tsv", table.to_tsv());
    *c.out << table.to_tsv();
}

inline void cmd_similarity(Context& c) {
    ExperimentData d = detail::prepare(c.cfg);
    Net model;
    if (d.pretrained) {
        model = *d.pretrained;
    } else {
        ModelConfig mc = c.cfg.spec.model;
        if (mc.encoder_kind == EncoderKind::TrainableEmbedding) mc.vocab_size = d.text.vocab.size();
        model = build_model<float>(mc, c.cfg.spec.seeds.front());
    }
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>> per_target;
    for (const auto& t : d.stance.targets) {
        std::vector<std::vector<double>> vecs;
        for (Split s : {Split::Train, Split::Test})
            for (const auto& r : d.stance.partition(t, s)) vecs.push_back(model.encoder_vector(d.text.input(r)));
        per_target.emplace_back(t, std::move(vecs));
    }
    SimilarityReport rep = target_similarity(per_target);
    write_file(c.rundir / "similarity_matrix.tsv", format_similarity_matrix(rep));
    write_file(c.rundir / "similarity_scores.tsv", format_similarity_scores(rep));
    *c.out << format_similarity_scores(rep);
}

struct ReportOptions {
    std::vector<std::string> results;  // DATASET=path
    std::string table = "ablation";
    std::string base, transfer;
};

inline TableKind parse_table_kind(const std::string& s) {
    if (s == "in_domain") return TableKind::InDomain;
    if (s == "intermediate") return TableKind::IntermediateTasks;
    if (s == "cross_target") return TableKind::CrossTarget;
    if (s == "ablation") return TableKind::Ablation;
    throw ConfigError("unknown table kind '" + s + "' (in_domain, intermediate, cross_target, ablation)");
}

inline void cmd_report(Context& c, const ReportOptions& o) {
    if (o.results.empty() && o.base.empty()) throw ConfigError("report: give --results and/or --base/--transfer");
    if (!o.results.empty()) {
        std::vector<TableGroup> groups;
        std::vector<std::pair<std::string, std::vector<AggregateRow>>> loaded;
        for (const auto& spec : o.results) {
            auto eq = spec.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("--results expects DATASET=path, got '" + spec + "'");
            const std::string name = spec.substr(0, eq);
            auto agg = parse_results_aggregate(spec.substr(eq + 1));
            TableGroup g{name, {}};
            for (const auto& a : agg)
                if (std::find(g.targets.begin(), g.targets.end(), a.target) == g.targets.end())
                    g.targets.push_back(a.target);
            groups.push_back(g);
            loaded.emplace_back(name, std::move(agg));
        }
        ResultTable table = make_table(parse_table_kind(o.table), groups);
        for (auto& [name, agg] : loaded)
            for (const auto& a : agg) table.set(a.variant, name, a.target, a.mean);
        write_file(c.rundir / "table.tsv", table.to_tsv());
        *c.out << table.to_tsv();
    }
    if (!o.base.empty()) {
        if (o.transfer.empty()) throw ConfigError("report: --base needs --transfer");
        EvalResult base = make_eval_result(parse_records_tsv(o.base));
        EvalResult transfer = make_eval_result(parse_records_tsv(o.transfer));
        std::map<std::string, bool> flags;
        for (const auto& r : transfer.records)
            if (r.sarcastic) flags[r.id] = *r.sarcastic;
        for (const auto& r : base.records)
            if (!flags.count(r.id) && r.sarcastic) flags[r.id] = *r.sarcastic;
        const double rate = sarcasm_recovery(base, transfer, flags);
        std::size_t denom = 0;
        for (const auto& r : base.records)
            if (!r.correct() && flags.count(r.id) && flags.at(r.id)) ++denom;
        write_file(c.rundir / "recovery.tsv", "metric\tvalue\nsarcasm_recovery\t" + format_fixed(rate, 6) +
                                                  "\ndenominator\t" + std::to_string(denom) + "\nbase_macro_f1\t" +
                                                  format_fixed(base.macro_f1_fa, 6) + "\ntransfer_macro_f1\t" +
                                                  format_fixed(transfer.macro_f1_fa, 6) + '\n');
        write_file(c.rundir / "failures_base.tsv", format_records_tsv(failure_report(base)));
        write_file(c.rundir / "failures_transfer.tsv", format_records_tsv(failure_report(transfer)));
        *c.out << "sarcasm recovery " << format_fixed(rate, 4) << " over " << denom << " samples\n";
    }
}

struct GradcheckOptions {
    std::size_t seeds = 20;
    double tolerance = 1e-4;
    double delta = 1e-4;
};

/// Returns kNumeric when any seed exceeds the tolerance.
inline int cmd_gradcheck(Context& c, const GradcheckOptions& o) {
    const ModelConfig& mc = c.cfg.spec.model;
    std::string out = "seed\tmax_rel_error\tworst_tensor\tchecked\n";
    double worst = 0;
    ModelGradCheckOptions opt;
    opt.delta = o.delta;
    for (std::size_t s = 1; s <= o.seeds; ++s) {
        auto rep = check_model_gradients(mc, s, opt);
        worst = std::max(worst, rep.max_rel_error);
        out += std::to_string(s) + '\t' + format_real(rep.max_rel_error) + '\t' + rep.worst_tensor + '\t' +
               std::to_string(rep.checked) + '\n';
    }
    write_file(c.rundir / "gradcheck.tsv", out);
    *c.out << "gradcheck: max relative error " << format_real(worst) << " over " << o.seeds << " seeds (tolerance "
           << format_real(o.tolerance) << ")\n";
    return worst <= o.tolerance ? kOk : kNumeric;
}

/// Parses argv, runs one verb and maps failures onto exit codes:
/// 1 usage/config, 2 data, 3 non-finite numerics.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
    CLI::App app{"Sarcasm-to-stance intermediate-task transfer pipeline", kToolName};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    std::size_t jobs = 0;
    ReportOptions report;
    GradcheckOptions grad;

    const std::vector<std::pair<std::string, std::string>> verbs{
        {"preprocess", "Normalize texts, expand hashtags and write the vocabulary"},
        {"pretrain", "Train the sarcasm model and write checkpoints"},
        {"finetune", "In-domain stance training and evaluation"},
        {"cross-target", "Leave-one-out cross-target stance training and evaluation"},
        {"ablate", "Run the ablation grid"},
        {"similarity", "Per-target cosine similarity of encoder vectors"},
        {"report", "Assemble result tables, recovery rate and failure listings"},
        {"gradcheck", "Finite-difference check of the full model graph"}};
    for (auto& [name, help] : verbs) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key<TAB>value config file");
        sub->add_option("--set", overrides, "key=value override (repeatable, last wins)");
        sub->add_option("--out", out_dir, "run directory (default $STANCELAB_RUNDIR/<verb>)");
        sub->add_option("--jobs", jobs, "seeds run in parallel");
        if (name == "report") {
            sub->add_option("--results", report.results, "DATASET=results.tsv (repeatable)");
            sub->add_option("--table", report.table, "in_domain | intermediate | cross_target | ablation");
            sub->add_option("--base", report.base, "predictions without pretraining");
            sub->add_option("--transfer", report.transfer, "predictions with pretraining");
        }
        if (name == "gradcheck") {
            sub->add_option("--seeds", grad.seeds, "number of random seeds");
            sub->add_option("--tolerance", grad.tolerance, "maximum relative error");
            sub->add_option("--delta", grad.delta, "central-difference step");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << kToolName << ": " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    Context c;
    c.out = &out;
    c.verb = app.get_subcommands().front()->get_name();
    bool manifest_ready = false;
    auto finish = [&](const std::string& status) {
        if (!manifest_ready) return;
        try {
            emit_run_manifest(c.rundir, c.verb, c.cfg, status);
        } catch (const std::exception& e) {
            err << kToolName << ": cannot write manifest: " << e.what() << '\n';
        }
    };
    try {
        if (c.verb == "gradcheck") {
            auto& m = c.cfg.spec.model;
            m.vocab_size = 12;
            m.embed_dim = 8;
            m.conv_filters = 4;
            m.lstm_hidden = 5;
            m.max_len = 7;
        }
        if (!config_path.empty()) apply_config_file(c.cfg, config_path);
        for (const auto& kv : overrides) apply_override(c.cfg, kv);
        if (jobs > 0) c.cfg.spec.jobs = jobs;
        c.cfg.spec.validate();
        c.rundir = resolve_rundir(out_dir, c.verb);
        std::filesystem::create_directories(c.rundir);
        manifest_ready = true;

        int code = kOk;
        if (c.verb == "preprocess") cmd_preprocess(c);
        else if (c.verb == "pretrain") cmd_pretrain(c);
        else if (c.verb == "finetune") cmd_experiment(c, Task::InDomain);
        else if (c.verb == "cross-target") cmd_experiment(c, Task::CrossTarget);
        else if (c.verb == "ablate") cmd_ablate(c);
        else if (c.verb == "similarity") cmd_similarity(c);
        else if (c.verb == "report") cmd_report(c, report);
        else if (c.verb == "gradcheck") code = cmd_gradcheck(c, grad);
        finish(code == kOk ? "completed" : "aborted");
        return code;
    } catch (const NumericError& e) {
        err << kToolName << ": numeric failure: " << e.what() << '\n';
        finish("aborted");
        return kNumeric;
    } catch (const DataError& e) {
        err << kToolName << ": data error: " << e.what() << '\n';
        finish("aborted");
        return kData;
    } catch (const std::out_of_range& e) {
        err << kToolName << ": data error: " << e.what() << '\n';
        finish("aborted");
        return kData;
    } catch (const std::exception& e) {
        err << kToolName << ": " << e.what() << '\n';
        finish("aborted");
        return kUsage;
    }
}

}  // namespace stancelab::cli
