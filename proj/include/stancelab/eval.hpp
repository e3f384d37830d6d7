// Stance metric (mean F1 of InFavor and Against), confusion analyses,
// sarcasm-recovery rate and target-similarity scores.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stancelab/corpus.hpp"
#include "stancelab/util.hpp"

namespace stancelab {

/// Rows are gold labels, columns predictions; class order InFavor, Against, None.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(std::size_t c = kStanceClasses) : classes(c), counts(c * c, 0) {}

    std::size_t& at(std::size_t gold, std::size_t pred) { return counts.at(gold * classes + pred); }
    std::size_t at(std::size_t gold, std::size_t pred) const { return counts.at(gold * classes + pred); }

    std::size_t total() const {
        std::size_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& golds,
                                 std::size_t classes = kStanceClasses) {
    if (preds.size() != golds.size())
        throw ConfigError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                          std::to_string(golds.size()) + " gold labels");
    if (preds.empty()) throw ConfigError("confusion: no samples");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] >= classes || golds[i] >= classes) throw ConfigError("confusion: label outside class set");
        ++cm.at(golds[i], preds[i]);
    }
    return cm;
}

struct ClassScores {
    double precision = 0, recall = 0, f1 = 0;
};

/// Zero-denominator convention: P, R and F1 are 0 when undefined.
inline ClassScores class_scores(const ConfusionMatrix& cm, std::size_t c) {
    std::size_t tp = cm.at(c, c), pred = 0, gold = 0;
    for (std::size_t k = 0; k < cm.classes; ++k) {
        pred += cm.at(k, c);
        gold += cm.at(c, k);
    }
    ClassScores s;
    if (tp == 0) return s;
    s.precision = static_cast<double>(tp) / static_cast<double>(pred);
    s.recall = static_cast<double>(tp) / static_cast<double>(gold);
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

inline double macro_f1_favor_against(const ConfusionMatrix& cm) {
    if (cm.classes != kStanceClasses) throw ConfigError("macro_f1_favor_against: needs a 3x3 confusion matrix");
    const double favor = class_scores(cm, static_cast<std::size_t>(StanceLabel::InFavor)).f1;
    const double against = class_scores(cm, static_cast<std::size_t>(StanceLabel::Against)).f1;
    return (favor + against) / 2.0;
}

inline double accuracy(const ConfusionMatrix& cm) {
    std::size_t diag = 0;
    for (std::size_t c = 0; c < cm.classes; ++c) diag += cm.at(c, c);
    const std::size_t n = cm.total();
    return n == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(n);
}

struct PredictionRecord {
    std::string id;
    std::string text;
    std::size_t gold = 0;
    std::size_t predicted = 0;
    std::optional<bool> sarcastic;

    bool correct() const { return gold == predicted; }
    bool operator==(const PredictionRecord&) const = default;
};

struct EvalResult {
    ConfusionMatrix confusion{kStanceClasses};
    std::vector<double> per_class_f1;
    double macro_f1_fa = 0;
    std::vector<PredictionRecord> records;
};

inline EvalResult make_eval_result(std::vector<PredictionRecord> records, std::size_t classes = kStanceClasses) {
    std::vector<std::size_t> preds, golds;
    for (const auto& r : records) {
        preds.push_back(r.predicted);
        golds.push_back(r.gold);
    }
    EvalResult res;
    res.confusion = confusion(preds, golds, classes);
    for (std::size_t c = 0; c < classes; ++c) res.per_class_f1.push_back(class_scores(res.confusion, c).f1);
    res.macro_f1_fa = classes == kStanceClasses ? macro_f1_favor_against(res.confusion) : 0.0;
    res.records = std::move(records);
    return res;
}

/// Misclassified records ordered by (gold, predicted, id).
inline std::vector<PredictionRecord> failure_report(const EvalResult& result) {
    std::vector<PredictionRecord> out;
    for (const auto& r : result.records)
        if (!r.correct()) out.push_back(r);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.gold != b.gold) return a.gold < b.gold;
        if (a.predicted != b.predicted) return a.predicted < b.predicted;
        return a.id < b.id;
    });
    return out;
}

inline const char* class_name(std::size_t c, std::size_t classes) {
    if (classes == kStanceClasses) return label_name(static_cast<StanceLabel>(c));
    return label_name(static_cast<SarcasmLabel>(c));
}

inline std::string format_records_tsv(const std::vector<PredictionRecord>& records, std::size_t classes = kStanceClasses) {
    std::string out = "id\tgold\tpredicted\tsarcastic\ttext\n";
    for (const auto& r : records) {
        out += r.id + '\t' + class_name(r.gold, classes) + '\t' + class_name(r.predicted, classes) + '\t' +
               (r.sarcastic ? (*r.sarcastic ? "1" : "0") : "NA") + '\t' + tsv_escape(r.text) + '\n';
    }
    return out;
}

inline std::vector<PredictionRecord> parse_records_tsv(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "id\tgold\tpredicted\tsarcastic\ttext")
        throw DataError(path.string() + ": not a prediction file");
    std::vector<PredictionRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split(lines[i], '\t');
        if (f.size() != 5) throw DataError(path.string() + " row " + std::to_string(i + 1) + ": expected 5 columns");
        auto gold = parse_stance_label(f[1]);
        auto pred = parse_stance_label(f[2]);
        if (!gold || !pred) throw DataError(path.string() + " row " + std::to_string(i + 1) + ": unknown label");
        PredictionRecord r{f[0], tsv_unescape(f[4]), static_cast<std::size_t>(*gold), static_cast<std::size_t>(*pred),
                           std::nullopt};
        if (f[3] == "1") r.sarcastic = true;
        else if (f[3] == "0") r.sarcastic = false;
        out.push_back(std::move(r));
    }
    return out;
}

/// Among samples the base model got wrong and that are flagged sarcastic, the
/// fraction the transfer model gets right.
inline double sarcasm_recovery(const EvalResult& base, const EvalResult& transfer,
                               const std::map<std::string, bool>& flags) {
    std::map<std::string, const PredictionRecord*> by_id;
    for (const auto& r : transfer.records) by_id[r.id] = &r;
    if (by_id.size() != base.records.size() || transfer.records.size() != base.records.size())
        throw ConfigError("sarcasm_recovery: base and transfer results cover different ids");
    std::size_t denom = 0, fixed = 0;
    for (const auto& r : base.records) {
        auto it = by_id.find(r.id);
        if (it == by_id.end()) throw ConfigError("sarcasm_recovery: id '" + r.id + "' missing from transfer result");
        auto f = flags.find(r.id);
        if (f == flags.end()) throw ConfigError("sarcasm_recovery: no sarcasm flag for id '" + r.id + "'");
        if (r.correct() || !f->second) continue;
        ++denom;
        if (it->second->correct()) ++fixed;
    }
    if (denom == 0) throw ConfigError("sarcasm_recovery: no sarcastic samples were misclassified by the base model");
    return static_cast<double>(fixed) / static_cast<double>(denom);
}

struct SimilarityReport {
    std::vector<std::string> targets;
    std::vector<std::vector<double>> means;   // per target, d-dim
    std::vector<std::vector<double>> cosine;  // symmetric, unit diagonal
    std::vector<double> scores;               // mean cosine against the other targets
};

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) throw ConfigError("cosine_similarity: zero-norm vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Per-target mean vectors, their pairwise cosines, and each target's mean
/// cosine against all other targets.
inline SimilarityReport target_similarity(
    const std::vector<std::pair<std::string, std::vector<std::vector<double>>>>& per_target) {
    if (per_target.size() < 2) throw ConfigError("target_similarity: need at least two targets");
    SimilarityReport rep;
    std::size_t dim = 0;
    for (const auto& [target, vecs] : per_target) {
        if (vecs.empty()) throw ConfigError("target_similarity: target '" + target + "' has no vectors");
        if (dim == 0) dim = vecs[0].size();
        std::vector<double> mean(dim, 0.0);
        for (const auto& v : vecs) {
            if (v.size() != dim) throw ConfigError("target_similarity: vectors differ in dimension");
            for (std::size_t i = 0; i < dim; ++i) mean[i] += v[i];
        }
        double norm = 0;
        for (auto& m : mean) {
            m /= static_cast<double>(vecs.size());
            norm += m * m;
        }
        if (norm == 0) throw ConfigError("target_similarity: zero-norm mean vector for target '" + target + "'");
        rep.targets.push_back(target);
        rep.means.push_back(std::move(mean));
    }
    const std::size_t n = rep.targets.size();
    rep.cosine.assign(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) rep.cosine[i][j] = rep.cosine[j][i] = cosine_similarity(rep.means[i], rep.means[j]);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) s += rep.cosine[i][j];
        rep.scores.push_back(s / static_cast<double>(n - 1));
    }
    return rep;
}

inline std::string format_similarity_matrix(const SimilarityReport& rep) {
    std::string out = "target";
    for (const auto& t : rep.targets) out += '\t' + t;
    out += '\n';
    for (std::size_t i = 0; i < rep.targets.size(); ++i) {
        out += rep.targets[i];
        for (double v : rep.cosine[i]) out += '\t' + format_fixed(v, 6);
        out += '\n';
    }
    return out;
}

inline std::string format_similarity_scores(const SimilarityReport& rep) {
    std::string out = "target\tscore\n";
    for (std::size_t i = 0; i < rep.targets.size(); ++i) out += rep.targets[i] + '\t' + format_fixed(rep.scores[i], 6) + '\n';
    return out;
}

}  // namespace stancelab
