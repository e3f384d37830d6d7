// Training protocol: sarcasm pretraining, head swap, stance fine-tuning
// (in-domain or leave-one-out cross-target), early stopping, learning-rate
// decay, multi-seed aggregation and the ablation grid.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "stancelab/corpus.hpp"
#include "stancelab/eval.hpp"
#include "stancelab/model.hpp"
#include "stancelab/nn.hpp"
#include "stancelab/textprep.hpp"
#include "stancelab/util.hpp"

namespace stancelab {

using Net = Model<float>;

struct TrainConfig {
    std::size_t batch_size = 16;
    double lr_init = 3e-5;
    double lr_floor = 1e-10;               // target task
    double intermediate_lr_floor = 1e-9;   // sarcasm pretraining
    std::size_t max_epochs = 50;
    std::size_t min_epochs = 10;
    std::size_t patience = 5;
    bool use_class_weights = true;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;          // train side when a validation set must be carved
    std::size_t cv_folds = 5;
    std::size_t size_threshold = 10000;   // below: k-fold CV for pretraining; otherwise a ratio split

    void validate() const {
        if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
        if (min_epochs < 1 || min_epochs > max_epochs) throw ConfigError("train: need 1 <= min_epochs <= max_epochs");
        if (patience < 1) throw ConfigError("train: patience must be at least 1");
        if (!(lr_init > 0) || !(lr_floor > 0) || !(lr_floor < lr_init) || !(intermediate_lr_floor > 0) ||
            !(intermediate_lr_floor < lr_init))
            throw ConfigError("train: learning-rate floors must be positive and below lr_init");
        if (cv_folds < 2) throw ConfigError("train: cv_folds must be at least 2");
        if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train: train_fraction must lie in (0,1)");
    }

    TrainConfig for_intermediate() const {
        TrainConfig c = *this;
        c.lr_floor = intermediate_lr_floor;
        return c;
    }

    std::vector<std::pair<std::string, std::string>> to_pairs() const {
        return {{"batch_size", std::to_string(batch_size)},
                {"lr_init", format_real(lr_init)},
                {"lr_floor", format_real(lr_floor)},
                {"intermediate_lr_floor", format_real(intermediate_lr_floor)},
                {"max_epochs", std::to_string(max_epochs)},
                {"min_epochs", std::to_string(min_epochs)},
                {"patience", std::to_string(patience)},
                {"use_class_weights", use_class_weights ? "1" : "0"},
                {"train_fraction", format_real(train_fraction)},
                {"cv_folds", std::to_string(cv_folds)},
                {"size_threshold", std::to_string(size_threshold)}};
    }

    bool set(const std::string& key, const std::string& value);
};

namespace detail {

inline std::size_t parse_size(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (value.empty() || value[0] == '-' || pos != value.size())
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
    return static_cast<std::size_t>(v);
}

inline double parse_real(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (value.empty() || pos != value.size() || !std::isfinite(v))
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    return v;
}

inline bool parse_flag(const std::string& key, const std::string& value) {
    std::string v = to_lower(value);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace detail

inline bool TrainConfig::set(const std::string& key, const std::string& value) {
    if (key == "batch_size") batch_size = detail::parse_size(key, value);
    else if (key == "lr_init") lr_init = detail::parse_real(key, value);
    else if (key == "lr_floor") lr_floor = detail::parse_real(key, value);
    else if (key == "intermediate_lr_floor") intermediate_lr_floor = detail::parse_real(key, value);
    else if (key == "max_epochs") max_epochs = detail::parse_size(key, value);
    else if (key == "min_epochs") min_epochs = detail::parse_size(key, value);
    else if (key == "patience") patience = detail::parse_size(key, value);
    else if (key == "use_class_weights") use_class_weights = detail::parse_flag(key, value);
    else if (key == "train_fraction") train_fraction = detail::parse_real(key, value);
    else if (key == "cv_folds") cv_folds = detail::parse_size(key, value);
    else if (key == "size_threshold") size_threshold = detail::parse_size(key, value);
    else return false;
    return true;
}

/// Per-epoch exponential decay from lr_init at epoch 1 to lr_floor at max_epochs.
inline double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
    if (epoch < 1 || epoch > cfg.max_epochs)
        throw ConfigError("lr_schedule: epoch " + std::to_string(epoch) + " outside [1, " +
                          std::to_string(cfg.max_epochs) + "]");
    if (epoch == 1 || cfg.max_epochs == 1) return cfg.lr_init;
    if (epoch == cfg.max_epochs) return cfg.lr_floor;
    const double t = static_cast<double>(epoch - 1) / static_cast<double>(cfg.max_epochs - 1);
    return cfg.lr_init * std::pow(cfg.lr_floor / cfg.lr_init, t);
}

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0;
    double val_accuracy = 0;
    double lr = 0;
    std::size_t batches = 0;
    std::size_t max_batch = 0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t stop_epoch = 0;
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0;
};

inline std::string format_history_tsv(const TrainHistory& h) {
    std::string out = "epoch\ttrain_loss\tval_accuracy\tlr\tbatches\tmax_batch\n";
    for (const auto& e : h.epochs)
        out += std::to_string(e.epoch) + '\t' + format_fixed(e.train_loss, 6) + '\t' + format_fixed(e.val_accuracy, 6) +
               '\t' + format_real(e.lr) + '\t' + std::to_string(e.batches) + '\t' + std::to_string(e.max_batch) + '\n';
    out += "# stop_epoch\t" + std::to_string(h.stop_epoch) + "\n# best_epoch\t" + std::to_string(h.best_epoch) + '\n';
    return out;
}

/// Patience rule: halt once `patience` epochs have passed without a strict
/// improvement, but never before `min_epochs`.
inline bool should_stop(std::size_t epoch, std::size_t best_epoch, const TrainConfig& cfg) {
    return epoch >= cfg.min_epochs && epoch - best_epoch >= cfg.patience;
}

/// Epoch at which training halts for a given validation-accuracy trace.
inline std::size_t simulate_stop_epoch(const std::vector<double>& val_accuracy, const TrainConfig& cfg,
                                       std::size_t* best_epoch_out = nullptr) {
    double best = -1;
    std::size_t best_epoch = 0, epoch = 0;
    for (epoch = 1; epoch <= cfg.max_epochs && epoch <= val_accuracy.size(); ++epoch) {
        if (val_accuracy[epoch - 1] > best) {
            best = val_accuracy[epoch - 1];
            best_epoch = epoch;
        }
        if (should_stop(epoch, best_epoch, cfg)) break;
    }
    if (best_epoch_out) *best_epoch_out = best_epoch;
    return std::min(epoch, std::min(cfg.max_epochs, val_accuracy.size()));
}

struct Example {
    ModelInput input;
    std::size_t gold = 0;
    std::string id;
    std::string text;
};

template <class T>
std::vector<std::size_t> predict(const Model<T>& model, const std::vector<Example>& data,
                                 std::size_t chunk = 64) {
    std::vector<std::size_t> preds;
    preds.reserve(data.size());
    Rng unused(0);
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        std::vector<ModelInput> batch;
        for (std::size_t i = start; i < std::min(data.size(), start + chunk); ++i) batch.push_back(data[i].input);
        auto probs = model.forward(batch, nn::Mode::Eval, unused);
        for (std::size_t r = 0; r < batch.size(); ++r) {
            const T* row = probs.row(r);
            preds.push_back(static_cast<std::size_t>(std::max_element(row, row + probs.cols()) - row));
        }
    }
    return preds;
}

template <class T>
double accuracy_on(const Model<T>& model, const std::vector<Example>& data) {
    if (data.empty()) return 0.0;
    auto preds = predict(model, data);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < data.size(); ++i) ok += preds[i] == data[i].gold;
    return static_cast<double>(ok) / static_cast<double>(data.size());
}

/// Mini-batch Adam with weighted cross-entropy, per-epoch learning-rate decay
/// and early stopping on validation accuracy. The returned model holds the
/// parameters of the best validation epoch.
template <class T>
std::pair<Model<T>, TrainHistory> train(Model<T> model, const std::vector<Example>& train_set,
                                        const std::vector<Example>& val_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty() || val_set.empty()) throw DataError("train: training and validation sets must be non-empty");
    const std::size_t classes = model.config().num_classes;
    std::vector<double> weights(classes, 1.0);
    if (cfg.use_class_weights) {
        std::vector<std::size_t> counts(classes, 0);
        for (const auto& e : train_set) ++counts.at(e.gold);
        weights = class_weights(counts).weights;
    }

    TrainHistory history;
    nn::AdamState<T> adam;
    auto params = model.parameters();
    Model<T> best = model;
    double best_acc = -1;
    std::vector<std::size_t> order(train_set.size());
    std::vector<ModelInput> batch;
    std::vector<std::size_t> golds;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr_schedule(epoch, cfg);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng::derive(cfg.seed, epoch).shuffle(order);
        Rng dropout_rng = Rng::derive(cfg.seed, 0x10000 + epoch);
        double loss_sum = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            batch.clear();
            golds.clear();
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) {
                batch.push_back(train_set[order[i]].input);
                golds.push_back(train_set[order[i]].gold);
            }
            model.zero_grad();
            const double loss = model.loss_and_backward(batch, golds, weights, dropout_rng);
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(rec.batches + 1) + " (lr " + format_real(rec.lr) + ")");
            nn::adam_step<T>(params, adam, rec.lr);
            loss_sum += loss * static_cast<double>(batch.size());
            ++rec.batches;
            rec.max_batch = std::max(rec.max_batch, batch.size());
        }
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        rec.val_accuracy = accuracy_on(model, val_set);
        history.epochs.push_back(rec);
        if (rec.val_accuracy > best_acc) {
            best_acc = rec.val_accuracy;
            history.best_epoch = epoch;
            best = model;
        }
        history.stop_epoch = epoch;
        if (should_stop(epoch, history.best_epoch, cfg)) break;
    }
    history.best_val_accuracy = best_acc;
    for (auto* t : best.parameters()) t->grad.clear();
    return {std::move(best), std::move(history)};
}

/// Text -> model input: hashtag expansion, normalization, vocabulary encoding,
/// or a lookup into precomputed encoder vectors.
struct TextPipeline {
    NormalizerConfig rules;
    std::shared_ptr<const SegmentationLexicon> lexicon;
    Vocab vocab;
    std::size_t max_len = 64;
    std::shared_ptr<const PrecomputedEmbeddings> precomputed;

    std::string clean(const std::string& text) const { return preprocess(text, rules, lexicon.get()); }

    ModelInput input(const LabeledText& s) const {
        if (precomputed) return precomputed->input_for(s.id);
        return ModelInput(encode(clean(s.text), vocab, max_len));
    }

    Example example(const LabeledText& s) const {
        return Example{input(s), static_cast<std::size_t>(s.class_index()), s.id, s.text};
    }

    std::vector<Example> examples(const std::vector<LabeledText>& rows) const {
        std::vector<Example> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(example(r));
        return out;
    }

    void build_vocab_from(const std::vector<std::string>& raw_texts, std::size_t max_size, std::size_t min_count) {
        std::vector<std::string> cleaned;
        cleaned.reserve(raw_texts.size());
        for (const auto& t : raw_texts) cleaned.push_back(clean(t));
        vocab = build_vocab(cleaned, max_size, min_count);
    }
};

struct PretrainResult {
    Net model;
    std::vector<TrainHistory> histories;  // one per fold, or one for the ratio split
    bool used_cv = false;
    std::size_t chosen_fold = 0;
    double val_accuracy = 0;
};

/// Binary sarcasm pretraining. Small corpora use k-fold cross-validation and
/// keep the fold model with the highest validation accuracy; large corpora use
/// a single stratified ratio split.
inline PretrainResult pretrain_intermediate(const std::vector<LabeledText>& sarcasm, const TextPipeline& text,
                                            ModelConfig model_cfg, const TrainConfig& cfg, std::uint64_t seed) {
    std::set<int> labels;
    for (const auto& s : sarcasm) labels.insert(s.class_index());
    if (labels.size() < 2) throw DataError("pretrain: degenerate labels (only one class present)");
    model_cfg.num_classes = kSarcasmClasses;
    TrainConfig tc = cfg.for_intermediate();
    tc.seed = seed;

    PretrainResult res;
    if (sarcasm.size() < cfg.size_threshold) {
        res.used_cv = true;
        auto folds = kfold(sarcasm, cfg.cv_folds, seed);
        double best = -1;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            std::vector<LabeledText> tr;
            for (std::size_t g = 0; g < folds.size(); ++g)
                if (g != f) tr.insert(tr.end(), folds[g].begin(), folds[g].end());
            TrainConfig fold_cfg = tc;
            fold_cfg.seed = Rng::derive(seed, 0x464f4c44 + f).next();
            auto [model, hist] = train(build_model<float>(model_cfg, fold_cfg.seed), text.examples(tr),
                                       text.examples(folds[f]), fold_cfg);
            if (hist.best_val_accuracy > best) {
                best = hist.best_val_accuracy;
                res.model = std::move(model);
                res.chosen_fold = f;
            }
            res.histories.push_back(std::move(hist));
        }
        res.val_accuracy = best;
    } else {
        auto [tr, val] = ratio_split(sarcasm, cfg.train_fraction, seed);
        auto [model, hist] = train(build_model<float>(model_cfg, seed), text.examples(tr), text.examples(val), tc);
        res.model = std::move(model);
        res.val_accuracy = hist.best_val_accuracy;
        res.histories.push_back(std::move(hist));
    }
    return res;
}

struct FinetuneResult {
    EvalResult eval;
    TrainHistory history;
    Net model;
};

/// Initialize from a pretrained model (head swapped to three classes) or from
/// scratch, train on the stance data and evaluate on the untouched test set.
/// Without a validation set, one is carved from `train_rows` by a stratified split.
inline FinetuneResult finetune_target(const Net* pretrained, const std::vector<LabeledText>& train_rows,
                                      std::vector<LabeledText> val_rows, const std::vector<LabeledText>& test_rows,
                                      const TextPipeline& text, ModelConfig model_cfg, const TrainConfig& cfg,
                                      std::uint64_t seed, const Net* sarcasm_flagger = nullptr) {
    model_cfg.num_classes = kStanceClasses;
    Net model;
    if (pretrained) {
        Net reference = build_model<float>(model_cfg, seed);
        auto diff = architecture_mismatches(reference, *pretrained);
        if (!diff.empty()) throw ConfigError("finetune: checkpoint architecture differs from model config: " + join(diff, "; "));
        model = swap_head(*pretrained, kStanceClasses, seed);
    } else {
        model = build_model<float>(model_cfg, seed);
    }

    std::vector<LabeledText> train_part = train_rows;
    if (val_rows.empty()) std::tie(train_part, val_rows) = ratio_split(train_rows, cfg.train_fraction, seed);

    std::set<std::string> test_ids;
    for (const auto& r : test_rows) test_ids.insert(r.id);
    for (const auto* part : {&train_part, &val_rows})
        for (const auto& r : *part)
            if (test_ids.count(r.id)) throw DataError("finetune: sample '" + r.id + "' appears in both training and test data");

    TrainConfig tc = cfg;
    tc.seed = seed;
    auto [trained, history] = train(std::move(model), text.examples(train_part), text.examples(val_rows), tc);

    auto test = text.examples(test_rows);
    auto preds = predict(trained, test);
    std::vector<std::size_t> flags;
    if (sarcasm_flagger) flags = predict(*sarcasm_flagger, test);
    std::vector<PredictionRecord> records;
    for (std::size_t i = 0; i < test.size(); ++i) {
        PredictionRecord r{test[i].id, test[i].text, test[i].gold, preds[i], std::nullopt};
        if (sarcasm_flagger) r.sarcastic = flags[i] == static_cast<std::size_t>(SarcasmLabel::Sarcastic);
        records.push_back(std::move(r));
    }
    return FinetuneResult{make_eval_result(std::move(records)), std::move(history), std::move(trained)};
}

// ---------------------------------------------------------------- experiments

enum class Task { InDomain, CrossTarget };

inline const char* task_name(Task t) { return t == Task::InDomain ? "in_domain" : "cross_target"; }

inline Task parse_task(const std::string& s) {
    if (s == "in_domain" || s == "in-domain") return Task::InDomain;
    if (s == "cross_target" || s == "cross-target") return Task::CrossTarget;
    throw ConfigError("unknown task '" + s + "'");
}

struct ExperimentSpec {
    Task task = Task::InDomain;
    std::string data;        // stance TSV (with a split column unless test_data is given)
    std::string test_data;   // optional separate test TSV
    std::string target;      // empty: every target in the dataset
    std::string sarcasm;     // optional intermediate-task corpus
    std::string intermediate_name;  // row label prefix; defaults to the sarcasm file stem
    bool pretrain = true;    // with a sarcasm corpus: pretrain, or only share its vocabulary
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ModelConfig model;
    TrainConfig train;
    NormalizerConfig normalizer;
    std::string lexicon;       // hashtag segmentation word list
    std::string replacements;  // normalization lexicon
    std::string embeddings;    // precomputed encoder vectors
    std::size_t vocab_max = 20000;
    std::size_t vocab_min_count = 1;
    std::size_t jobs = 1;

    void validate() const {
        if (seeds.empty()) throw ConfigError("experiment: seeds must be non-empty");
        if (jobs < 1) throw ConfigError("experiment: jobs must be at least 1");
        train.validate();
    }
};

/// Loaded inputs of an experiment.
struct ExperimentData {
    StanceDataset stance;
    std::optional<SarcasmDataset> sarcasm;
    TextPipeline text;
    std::shared_ptr<const Net> pretrained;  // loaded checkpoint; replaces per-seed pretraining
};

/// Row label such as "ST+encoder+Conv+BiLSTM".
inline std::string variant_label(const ModelConfig& m, const std::string& intermediate, bool pretrained) {
    std::string s = pretrained && !intermediate.empty() ? intermediate + "+encoder" : "encoder";
    if (m.conv_layers > 0) s += "+Conv";
    if (m.use_bilstm) s += "+BiLSTM";
    return s;
}

inline ExperimentData load_experiment_data(const ExperimentSpec& spec) {
    ExperimentData d;
    if (spec.data.empty()) throw ConfigError("experiment: 'data' is required");
    d.stance = spec.test_data.empty() ? load_stance_dataset(spec.data) : load_stance_dataset(spec.data, spec.test_data);
    if (!spec.sarcasm.empty()) d.sarcasm = load_sarcasm_dataset(spec.sarcasm);
    d.text.rules = spec.normalizer;
    if (!spec.replacements.empty()) d.text.rules.replacements = load_replacement_lexicon(spec.replacements);
    if (!spec.lexicon.empty())
        d.text.lexicon = std::make_shared<const SegmentationLexicon>(SegmentationLexicon::from_file(spec.lexicon));
    d.text.max_len = spec.model.max_len;
    if (!spec.embeddings.empty()) {
        auto pe = std::make_shared<const PrecomputedEmbeddings>(PrecomputedEmbeddings::load(spec.embeddings));
        if (spec.model.encoder_kind != EncoderKind::PrecomputedFile)
            throw ConfigError("experiment: 'embeddings' requires encoder_kind=precomputed_file");
        if (pe->dim != spec.model.embed_dim)
            throw ConfigError("experiment: embedding file has d=" + std::to_string(pe->dim) + " but embed_dim=" +
                              std::to_string(spec.model.embed_dim));
        d.text.precomputed = std::move(pe);
    } else if (spec.model.encoder_kind == EncoderKind::PrecomputedFile) {
        throw ConfigError("experiment: encoder_kind=precomputed_file needs an 'embeddings' file");
    }
    return d;
}

/// Vocabulary over the sarcasm corpus and every stance training partition.
inline void build_experiment_vocab(ExperimentData& d, const ExperimentSpec& spec) {
    std::vector<std::string> texts;
    if (d.sarcasm)
        for (const auto& s : d.sarcasm->samples) texts.push_back(s.text);
    for (const auto& t : d.stance.targets)
        for (const auto& s : d.stance.partition(t, Split::Train)) texts.push_back(s.text);
    d.text.build_vocab_from(texts, spec.vocab_max, spec.vocab_min_count);
}

struct RunRecord {
    std::string target;
    std::uint64_t seed = 0;
    double macro_f1 = 0;
    EvalResult eval;
    TrainHistory history;
    std::optional<std::size_t> pretrain_fold;
};

struct Aggregate {
    std::string target;
    double mean = 0;
    double stdev = 0;
    std::size_t n = 0;
};

struct ExperimentResult {
    std::string variant;
    Task task = Task::InDomain;
    std::vector<RunRecord> runs;        // sorted by (target order, seed)
    std::vector<Aggregate> aggregates;  // per target, dataset order
};

/// Arithmetic mean and sample standard deviation (0 for a single value).
inline std::pair<double, double> mean_stdev(std::vector<double> values) {
    if (values.empty()) return {0.0, 0.0};
    std::sort(values.begin(), values.end());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

inline std::vector<std::string> experiment_targets(const ExperimentData& d, const ExperimentSpec& spec) {
    if (spec.task == Task::CrossTarget && d.stance.targets.size() < 2)
        throw DataError("cross-target experiment needs at least two targets; '" + d.stance.name + "' has " +
                        std::to_string(d.stance.targets.size()));
    if (spec.target.empty()) return d.stance.targets;
    if (!d.stance.has_target(spec.target)) throw DataError("unknown target '" + spec.target + "'");
    return {spec.target};
}

namespace detail {

/// Every target for one seed; the sarcasm model is trained once per seed.
inline std::vector<RunRecord> run_seed(const ExperimentData& d, const ExperimentSpec& spec,
                                       const std::vector<std::string>& targets, std::uint64_t seed) {
    ModelConfig mc = spec.model;
    if (mc.encoder_kind == EncoderKind::TrainableEmbedding) mc.vocab_size = d.text.vocab.size();
    std::optional<PretrainResult> pre;
    const Net* init = nullptr;
    if (spec.pretrain && d.pretrained) {
        init = d.pretrained.get();
    } else if (spec.pretrain && d.sarcasm) {
        pre = pretrain_intermediate(d.sarcasm->samples, d.text, mc, spec.train, seed);
        init = &pre->model;
    }

    std::vector<RunRecord> out;
    for (const auto& target : targets) {
        std::vector<LabeledText> train_rows, test_rows;
        if (spec.task == Task::CrossTarget) {
            auto split = assemble_cross_target(d.stance, target);
            train_rows = std::move(split.train);
            test_rows = std::move(split.test);
        } else {
            train_rows = d.stance.partition(target, Split::Train);
            test_rows = d.stance.partition(target, Split::Test);
        }
        if (test_rows.empty()) throw DataError("target '" + target + "' has no test samples");
        auto ft = finetune_target(init, train_rows, {}, test_rows, d.text, mc, spec.train, seed, init);
        RunRecord rec;
        rec.target = target;
        rec.seed = seed;
        rec.macro_f1 = ft.eval.macro_f1_fa;
        rec.eval = std::move(ft.eval);
        rec.history = std::move(ft.history);
        if (pre && pre->used_cv) rec.pretrain_fold = pre->chosen_fold;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace detail

/// Full pipeline per seed, then per-target mean and standard deviation.
/// Seeds may run on `spec.jobs` threads; results are ordered by seed.
inline ExperimentResult run_experiment(const ExperimentData& d, const ExperimentSpec& spec) {
    spec.validate();
    const auto targets = experiment_targets(d, spec);
    ExperimentResult res;
    res.task = spec.task;
    std::string inter = spec.intermediate_name;
    if (inter.empty() && d.sarcasm) inter = d.sarcasm->name;
    res.variant = variant_label(spec.model, inter, spec.pretrain && (d.sarcasm || d.pretrained));

    std::vector<std::uint64_t> seeds = spec.seeds;
    std::stable_sort(seeds.begin(), seeds.end());
    std::vector<std::vector<RunRecord>> per_seed(seeds.size());
    for (std::size_t start = 0; start < seeds.size(); start += spec.jobs) {
        const std::size_t end = std::min(seeds.size(), start + spec.jobs);
        if (end - start == 1) {
            per_seed[start] = detail::run_seed(d, spec, targets, seeds[start]);
            continue;
        }
        std::vector<std::future<std::vector<RunRecord>>> futs;
        for (std::size_t i = start; i < end; ++i)
            futs.push_back(std::async(std::launch::async, [&, i] { return detail::run_seed(d, spec, targets, seeds[i]); }));
        for (std::size_t i = start; i < end; ++i) per_seed[i] = futs[i - start].get();
    }
    for (const auto& target : targets) {
        std::vector<double> scores;
        for (auto& runs : per_seed)
            for (auto& r : runs)
                if (r.target == target) {
                    scores.push_back(r.macro_f1);
                    res.runs.push_back(r);
                }
        auto [mean, sd] = mean_stdev(scores);
        res.aggregates.push_back(Aggregate{target, mean, sd, scores.size()});
    }
    return res;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentData d = load_experiment_data(spec);
    build_experiment_vocab(d, spec);
    return run_experiment(d, spec);
}

/// `variant<TAB>target<TAB>seed<TAB>macro_f1` rows, then an aggregate block.
inline std::string format_results_tsv(const std::vector<ExperimentResult>& results) {
    std::string out = "variant\ttarget\tseed\tmacro_f1\n";
    for (const auto& r : results)
        for (const auto& run : r.runs)
            out += r.variant + '\t' + run.target + '\t' + std::to_string(run.seed) + '\t' + format_fixed(run.macro_f1, 6) + '\n';
    out += "\n# aggregate\nvariant\ttarget\tmean\tstdev\tn\n";
    for (const auto& r : results)
        for (const auto& a : r.aggregates)
            out += r.variant + '\t' + a.target + '\t' + format_fixed(a.mean, 6) + '\t' + format_fixed(a.stdev, 6) + '\t' +
                   std::to_string(a.n) + '\n';
    return out;
}

struct AggregateRow {
    std::string variant;
    std::string target;
    double mean = 0;
};

/// Aggregate rows read back from a results file, in file order.
inline std::vector<AggregateRow> parse_results_aggregate(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    std::vector<AggregateRow> out;
    bool in_block = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i] == "# aggregate") {
            in_block = true;
            ++i;  // column header
            continue;
        }
        if (!in_block || trim(lines[i]).empty()) continue;
        auto f = split(lines[i], '\t');
        if (f.size() != 5) throw DataError(path.string() + " row " + std::to_string(i + 1) + ": malformed aggregate row");
        out.push_back({f[0], f[1], detail::parse_real("mean", f[2])});
    }
    if (!in_block) throw DataError(path.string() + ": no aggregate block");
    return out;
}

// ---------------------------------------------------------------- result tables

/// Column group of a result table: one dataset, its targets, then Avg.
struct TableGroup {
    std::string dataset;
    std::vector<std::string> targets;
};

/// Row/column layout of the published result tables: a corner label, one
/// column per (dataset, target) plus a per-dataset Avg column, "-" for gaps.
struct ResultTable {
    std::string title;
    std::string corner;
    std::vector<TableGroup> groups;
    std::vector<std::string> row_labels;
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>> cells;  // (row, dataset) -> target -> value

    void set(const std::string& row, const std::string& dataset, const std::string& target, double v) {
        if (std::find(row_labels.begin(), row_labels.end(), row) == row_labels.end()) row_labels.push_back(row);
        cells[{row, dataset}][target] = v;
    }

    std::optional<double> get(const std::string& row, const std::string& dataset, const std::string& target) const {
        auto it = cells.find({row, dataset});
        if (it == cells.end()) return std::nullopt;
        auto jt = it->second.find(target);
        if (jt == it->second.end()) return std::nullopt;
        return jt->second;
    }

    /// Mean over the targets present in that row for the dataset.
    std::optional<double> average(const std::string& row, const TableGroup& g) const {
        double s = 0;
        std::size_t n = 0;
        for (const auto& t : g.targets)
            if (auto v = get(row, g.dataset, t)) {
                s += *v;
                ++n;
            }
        if (n == 0) return std::nullopt;
        return s / static_cast<double>(n);
    }

    std::vector<std::string> header() const {
        std::vector<std::string> h{corner};
        for (const auto& g : groups) {
            for (const auto& t : g.targets) h.push_back(g.dataset + ":" + t);
            h.push_back(g.dataset + ":Avg");
        }
        return h;
    }

    std::string to_tsv() const {
        std::string out = "# " + title + '\n' + join(header(), "\t") + '\n';
        for (const auto& row : row_labels) {
            out += row;
            for (const auto& g : groups) {
                for (const auto& t : g.targets) {
                    auto v = get(row, g.dataset, t);
                    out += '\t' + (v ? format_fixed(*v, 3) : std::string("-"));
                }
                auto avg = average(row, g);
                out += '\t' + (avg ? format_fixed(*avg, 3) : std::string("-"));
            }
            out += '\n';
        }
        return out;
    }
};

enum class TableKind { InDomain, IntermediateTasks, CrossTarget, Ablation };

/// Title and corner label mirroring each published table.
inline ResultTable make_table(TableKind kind, std::vector<TableGroup> groups) {
    ResultTable t;
    t.groups = std::move(groups);
    switch (kind) {
        case TableKind::InDomain:
            t.title = "In-domain stance detection without sarcasm pretraining (macro-F1 of InFavor/Against)";
            t.corner = "Model";
            break;
        case TableKind::IntermediateTasks:
            t.title = "In-domain stance detection per intermediate sarcasm task";
            t.corner = "Task";
            break;
        case TableKind::CrossTarget:
            t.title = "Cross-target (leave-one-out) stance detection";
            t.corner = "Task";
            break;
        case TableKind::Ablation:
            t.title = "Ablation over encoder, Conv, BiLSTM and sarcasm pretraining";
            t.corner = "Model";
            break;
    }
    return t;
}

inline void add_result(ResultTable& table, const std::string& row, const std::string& dataset,
                       const ExperimentResult& r) {
    for (const auto& a : r.aggregates) table.set(row, dataset, a.target, a.mean);
}

struct AblationVariant {
    bool conv = false;
    bool bilstm = false;
    bool pretrain = false;

    std::string label(const std::string& intermediate) const {
        ModelConfig m;
        m.conv_layers = conv ? 2 : 0;
        m.use_bilstm = bilstm;
        return variant_label(m, intermediate, pretrain);
    }

    bool operator==(const AblationVariant&) const = default;
};

/// Accepts row labels ("encoder", "ST+encoder+Conv+BiLSTM", "sarcasm+encoder+BiLSTM")
/// and the short forms "encoder-only", "+conv", "+bilstm", "+conv+bilstm"
/// with an optional ":with" / ":without" pretraining suffix.
inline AblationVariant parse_variant(const std::string& name, const std::string& intermediate) {
    std::string s = name;
    AblationVariant v;
    auto colon = s.rfind(':');
    std::optional<bool> suffix;
    if (colon != std::string::npos) {
        std::string tail = s.substr(colon + 1);
        if (tail == "with") suffix = true;
        else if (tail == "without") suffix = false;
        else throw ConfigError("unknown ablation variant '" + name + "'");
        s = s.substr(0, colon);
    }
    if (s == "encoder-only") s = "encoder";
    else if (!s.empty() && s[0] == '+') s = "encoder" + s;
    auto parts = split(s, '+');
    std::size_t i = 0;
    if (!parts.empty() && parts[0] != "encoder") {
        if (parts[0] != intermediate && to_lower(parts[0]) != "sarcasm")
            throw ConfigError("unknown ablation variant '" + name + "'");
        v.pretrain = true;
        ++i;
    }
    if (i >= parts.size() || parts[i] != "encoder") throw ConfigError("unknown ablation variant '" + name + "'");
    for (++i; i < parts.size(); ++i) {
        std::string p = to_lower(parts[i]);
        if (p == "conv" && !v.conv && !v.bilstm) v.conv = true;
        else if (p == "bilstm" && !v.bilstm) v.bilstm = true;
        else throw ConfigError("unknown ablation variant '" + name + "'");
    }
    if (suffix) {
        if (v.pretrain && !*suffix) throw ConfigError("unknown ablation variant '" + name + "'");
        v.pretrain = *suffix;
    }
    return v;
}

/// The six rows of the published ablation, in its order.
inline std::vector<AblationVariant> default_ablation_grid() {
    return {{false, false, false}, {true, true, false}, {false, false, true},
            {true, false, true},   {false, true, true}, {true, true, true}};
}

/// One aggregated experiment per variant and dataset, collected into a table
/// whose rows follow the grid order.
inline ResultTable run_ablation(const std::vector<std::pair<ExperimentData*, ExperimentSpec>>& datasets,
                                const std::vector<AblationVariant>& grid,
                                std::vector<ExperimentResult>* results_out = nullptr) {
    if (datasets.empty()) throw ConfigError("ablation: no datasets");
    std::vector<TableGroup> groups;
    for (auto& [d, spec] : datasets) groups.push_back({d->stance.name, experiment_targets(*d, spec)});
    ResultTable table = make_table(TableKind::Ablation, groups);
    for (const auto& v : grid) {
        for (auto& [d, base] : datasets) {
            if (v.pretrain && !d->sarcasm) throw ConfigError("ablation: variant needs a sarcasm corpus");
            ExperimentSpec spec = base;
            spec.model.conv_layers = v.conv ? std::max<std::size_t>(base.model.conv_layers, 1) : 0;
            spec.model.use_bilstm = v.bilstm;
            spec.pretrain = v.pretrain;
            std::string inter = spec.intermediate_name.empty() && d->sarcasm ? d->sarcasm->name : spec.intermediate_name;
            spec.intermediate_name = inter;
            ExperimentResult r = run_experiment(*d, spec);
            r.variant = v.label(inter);
            add_result(table, r.variant, d->stance.name, r);
            if (results_out) results_out->push_back(std::move(r));
        }
    }
    return table;
}

}  // namespace stancelab
