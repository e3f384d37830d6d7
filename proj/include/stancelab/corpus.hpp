// Stance and sarcasm corpora: TSV ingestion, leave-one-out assembly, folds,
// ratio splits and class weights.
#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "stancelab/util.hpp"

namespace stancelab {

enum class StanceLabel { InFavor = 0, Against = 1, None = 2 };
enum class SarcasmLabel { NotSarcastic = 0, Sarcastic = 1 };

inline constexpr std::size_t kStanceClasses = 3;
inline constexpr std::size_t kSarcasmClasses = 2;

inline std::optional<StanceLabel> parse_stance_label(std::string_view token) {
    std::string t = to_upper(trim(token));
    if (t == "FAVOR" || t == "INFAVOR" || t == "IN_FAVOR") return StanceLabel::InFavor;
    if (t == "AGAINST") return StanceLabel::Against;
    if (t == "NONE") return StanceLabel::None;
    return std::nullopt;
}

inline std::optional<SarcasmLabel> parse_sarcasm_label(std::string_view token) {
    std::string t = to_upper(trim(token));
    if (t == "SARCASTIC") return SarcasmLabel::Sarcastic;
    if (t == "NOT_SARCASTIC") return SarcasmLabel::NotSarcastic;
    return std::nullopt;
}

inline const char* label_name(StanceLabel l) {
    switch (l) {
        case StanceLabel::InFavor: return "FAVOR";
        case StanceLabel::Against: return "AGAINST";
        case StanceLabel::None: return "NONE";
    }
    return "?";
}

inline const char* label_name(SarcasmLabel l) {
    return l == SarcasmLabel::Sarcastic ? "SARCASTIC" : "NOT_SARCASTIC";
}

struct LabeledText {
    std::string id;
    std::optional<std::string> target;  // absent for sarcasm data
    std::string text;
    std::variant<StanceLabel, SarcasmLabel> label;

    int class_index() const {
        return std::visit([](auto l) { return static_cast<int>(l); }, label);
    }
    bool operator==(const LabeledText&) const = default;
};

enum class Split { Train, Test };

inline const char* split_name(Split s) { return s == Split::Train ? "train" : "test"; }

using StanceCounts = std::array<std::size_t, kStanceClasses>;

struct StanceDataset {
    std::string name;
    std::vector<std::string> targets;  // order of first appearance
    std::map<std::pair<std::string, Split>, std::vector<LabeledText>> partitions;
    std::size_t dropped_rows = 0;

    const std::vector<LabeledText>& partition(const std::string& target, Split split) const {
        static const std::vector<LabeledText> empty;
        auto it = partitions.find({target, split});
        return it == partitions.end() ? empty : it->second;
    }

    bool has_target(const std::string& t) const {
        return std::find(targets.begin(), targets.end(), t) != targets.end();
    }

    StanceCounts counts(const std::string& target, Split split) const {
        StanceCounts c{};
        for (const auto& s : partition(target, split)) ++c[static_cast<std::size_t>(s.class_index())];
        return c;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [key, rows] : partitions) n += rows.size();
        return n;
    }

    bool operator==(const StanceDataset&) const = default;
};

struct SarcasmDataset {
    std::string name;
    std::vector<LabeledText> samples;
    std::size_t dropped_rows = 0;

    std::array<std::size_t, kSarcasmClasses> counts() const {
        std::array<std::size_t, kSarcasmClasses> c{};
        for (const auto& s : samples) ++c[static_cast<std::size_t>(s.class_index())];
        return c;
    }

    bool operator==(const SarcasmDataset&) const = default;
};

struct CrossTargetSplit {
    std::string destination;
    std::vector<LabeledText> train;
    std::vector<LabeledText> test;
};

struct ClassWeights {
    std::vector<double> weights;

    double operator[](std::size_t c) const { return weights.at(c); }
    std::size_t size() const { return weights.size(); }

    static ClassWeights uniform(std::size_t classes) { return {std::vector<double>(classes, 1.0)}; }
};

/// Header names of the stance TSV columns. `split` is optional in the file.
struct StanceSchema {
    std::string id = "id";
    std::string target = "target";
    std::string text = "text";
    std::string label = "label";
    std::string split = "split";
};

namespace detail {

struct TsvTable {
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

inline TsvTable read_tsv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
    auto lines = read_lines(path);
    if (lines.empty()) throw DataError("empty dataset: " + path.string() + " has no header");
    TsvTable t;
    t.header = split(lines[0], '\t');
    for (auto& h : t.header) h = std::string(trim(h));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto fields = split(lines[i], '\t');
        if (fields.size() != t.header.size())
            throw DataError(path.string() + " row " + std::to_string(i + 1) + ": expected " +
                            std::to_string(t.header.size()) + " columns, found " +
                            std::to_string(fields.size()));
        t.rows.emplace_back(i + 1, std::move(fields));
    }
    return t;
}

inline std::optional<std::size_t> column(const TsvTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name) return i;
    return std::nullopt;
}

inline std::size_t require_column(const TsvTable& t, const std::string& name,
                                  const std::filesystem::path& path) {
    auto c = column(t, name);
    if (!c) throw DataError(path.string() + " row 1: missing column '" + name + "'");
    return *c;
}

inline std::string row_prefix(const std::filesystem::path& path, std::size_t line) {
    return path.string() + " row " + std::to_string(line) + ": ";
}

}  // namespace detail

/// Read a stance TSV. Rows whose text is empty after trimming are dropped and
/// counted. Without a split column every row goes to `default_split`.
inline StanceDataset load_stance_dataset(const std::filesystem::path& path,
                                         const StanceSchema& schema = {},
                                         Split default_split = Split::Train) {
    auto table = detail::read_tsv(path);
    const auto c_id = detail::require_column(table, schema.id, path);
    const auto c_target = detail::require_column(table, schema.target, path);
    const auto c_text = detail::require_column(table, schema.text, path);
    const auto c_label = detail::require_column(table, schema.label, path);
    const auto c_split = detail::column(table, schema.split);

    StanceDataset ds;
    ds.name = path.stem().string();
    std::unordered_set<std::string> seen;
    for (auto& [line, f] : table.rows) {
        std::string text = tsv_unescape(f[c_text]);
        if (trim(text).empty()) {
            ++ds.dropped_rows;
            continue;
        }
        auto label = parse_stance_label(f[c_label]);
        if (!label)
            throw DataError(detail::row_prefix(path, line) + "unknown label token '" + f[c_label] + "'");
        std::string id(trim(f[c_id]));
        if (!seen.insert(id).second) throw DataError(detail::row_prefix(path, line) + "duplicate id '" + id + "'");
        std::string target(trim(f[c_target]));
        if (target.empty()) throw DataError(detail::row_prefix(path, line) + "empty target");
        Split split = default_split;
        if (c_split) {
            std::string s = to_lower(trim(f[*c_split]));
            if (s == "train") split = Split::Train;
            else if (s == "test") split = Split::Test;
            else throw DataError(detail::row_prefix(path, line) + "unknown split '" + f[*c_split] + "'");
        }
        if (!ds.has_target(target)) ds.targets.push_back(target);
        ds.partitions[{target, split}].push_back(LabeledText{id, target, std::move(text), *label});
    }
    if (ds.size() == 0) throw DataError("empty dataset: " + path.string());
    return ds;
}

/// Merge separate train and test files (the usual distribution of SemEval-style data).
inline StanceDataset load_stance_dataset(const std::filesystem::path& train_path,
                                         const std::filesystem::path& test_path,
                                         const StanceSchema& schema = {}) {
    StanceDataset ds = load_stance_dataset(train_path, schema, Split::Train);
    StanceDataset test = load_stance_dataset(test_path, schema, Split::Test);
    std::unordered_set<std::string> ids;
    for (const auto& [key, rows] : ds.partitions)
        for (const auto& r : rows) ids.insert(r.id);
    for (auto& [key, rows] : test.partitions) {
        for (auto& r : rows) {
            if (ids.count(r.id)) throw DataError(test_path.string() + ": duplicate id '" + r.id + "'");
            ds.partitions[key].push_back(std::move(r));
        }
        if (!ds.has_target(key.first)) ds.targets.push_back(key.first);
    }
    ds.dropped_rows += test.dropped_rows;
    return ds;
}

inline SarcasmDataset load_sarcasm_dataset(const std::filesystem::path& path) {
    auto table = detail::read_tsv(path);
    const auto c_id = detail::require_column(table, "id", path);
    const auto c_text = detail::require_column(table, "text", path);
    const auto c_label = detail::require_column(table, "label", path);

    SarcasmDataset ds;
    ds.name = path.stem().string();
    std::unordered_set<std::string> seen;
    for (auto& [line, f] : table.rows) {
        std::string text = tsv_unescape(f[c_text]);
        if (trim(text).empty()) {
            ++ds.dropped_rows;
            continue;
        }
        auto label = parse_sarcasm_label(f[c_label]);
        if (!label)
            throw DataError(detail::row_prefix(path, line) + "unknown label token '" + f[c_label] + "'");
        std::string id(trim(f[c_id]));
        if (!seen.insert(id).second) throw DataError(detail::row_prefix(path, line) + "duplicate id '" + id + "'");
        ds.samples.push_back(LabeledText{id, std::nullopt, std::move(text), *label});
    }
    if (ds.samples.empty()) throw DataError("empty dataset: " + path.string());
    return ds;
}

inline std::string format_stance_tsv(const std::vector<LabeledText>& rows, bool with_split_column,
                                     Split split = Split::Train) {
    std::string out = with_split_column ? "id\ttarget\ttext\tlabel\tsplit\n" : "id\ttarget\ttext\tlabel\n";
    for (const auto& r : rows) {
        out += r.id + '\t' + r.target.value_or("") + '\t' + tsv_escape(r.text) + '\t' +
               label_name(std::get<StanceLabel>(r.label));
        if (with_split_column) out += std::string("\t") + split_name(split);
        out += '\n';
    }
    return out;
}

inline std::string format_stance_tsv(const StanceDataset& ds) {
    std::string out = "id\ttarget\ttext\tlabel\tsplit\n";
    for (const auto& t : ds.targets)
        for (Split s : {Split::Train, Split::Test})
            for (const auto& r : ds.partition(t, s))
                out += r.id + '\t' + t + '\t' + tsv_escape(r.text) + '\t' +
                       label_name(std::get<StanceLabel>(r.label)) + '\t' + split_name(s) + '\n';
    return out;
}

inline std::string format_sarcasm_tsv(const std::vector<LabeledText>& rows) {
    std::string out = "id\ttext\tlabel\n";
    for (const auto& r : rows)
        out += r.id + '\t' + tsv_escape(r.text) + '\t' + label_name(std::get<SarcasmLabel>(r.label)) + '\n';
    return out;
}

/// Leave-one-out assembly: the training pool is every other target's train and
/// test partitions; the destination's test partition is the evaluation set.
inline CrossTargetSplit assemble_cross_target(const StanceDataset& ds, const std::string& destination) {
    if (ds.targets.size() < 2)
        throw DataError("cross-target assembly needs at least two targets; dataset '" + ds.name + "' has " +
                        std::to_string(ds.targets.size()));
    if (!ds.has_target(destination)) throw DataError("unknown destination target '" + destination + "'");
    CrossTargetSplit out;
    out.destination = destination;
    for (const auto& t : ds.targets) {
        if (t == destination) continue;
        for (Split s : {Split::Train, Split::Test}) {
            const auto& part = ds.partition(t, s);
            out.train.insert(out.train.end(), part.begin(), part.end());
        }
    }
    out.test = ds.partition(destination, Split::Test);
    return out;
}

inline StanceCounts count_labels(const std::vector<LabeledText>& rows) {
    StanceCounts c{};
    for (const auto& r : rows) ++c[static_cast<std::size_t>(r.class_index())];
    return c;
}

/// Shuffle with a seeded generator, then deal round-robin into k folds.
template <class T>
std::vector<std::vector<T>> kfold(const std::vector<T>& samples, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold: k must be at least 2");
    if (k > samples.size())
        throw ConfigError("kfold: k=" + std::to_string(k) + " exceeds sample count " +
                          std::to_string(samples.size()));
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<T>> folds(k);
    for (std::size_t i = 0; i < order.size(); ++i) folds[i % k].push_back(samples[order[i]]);
    return folds;
}

/// Label-stratified split. The train side receives round(fraction * n) samples
/// in total (clamped so both sides are non-empty), allocated across classes by
/// largest remainder.
template <class T, class LabelOf>
std::pair<std::vector<T>, std::vector<T>> ratio_split(const std::vector<T>& samples, double train_fraction,
                                                      std::uint64_t seed, LabelOf label_of) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("ratio_split: train fraction must lie in (0,1)");
    if (samples.size() < 2) throw ConfigError("ratio_split: need at least two samples");
    const std::size_t n = samples.size();
    auto total = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    total = std::clamp<std::size_t>(total, 1, n - 1);

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<int>(label_of(samples[i]))].push_back(i);

    Rng rng(seed);
    std::vector<std::pair<int, std::size_t>> quota;  // (class, train count)
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (auto& [cls, idx] : by_class) {
        rng.shuffle(idx);
        double ideal = train_fraction * static_cast<double>(idx.size());
        auto base = static_cast<std::size_t>(std::floor(ideal));
        quota.emplace_back(cls, base);
        remainders.emplace_back(ideal - static_cast<double>(base), cls);
        assigned += base;
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    // Hand out (or take back) single samples until the total is exact.
    for (std::size_t r = 0; assigned < total; r = (r + 1) % remainders.size()) {
        for (auto& [cls, q] : quota)
            if (cls == remainders[r].second && q < by_class[cls].size()) {
                ++q;
                ++assigned;
                break;
            }
    }
    for (std::size_t r = remainders.size(); assigned > total;) {
        r = (r == 0 ? remainders.size() : r) - 1;
        for (auto& [cls, q] : quota)
            if (cls == remainders[r].second && q > 0) {
                --q;
                --assigned;
                break;
            }
    }

    std::vector<std::size_t> train_idx, val_idx;
    for (auto& [cls, q] : quota) {
        const auto& idx = by_class[cls];
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(q));
        val_idx.insert(val_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(q), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::pair<std::vector<T>, std::vector<T>> out;
    for (auto i : train_idx) out.first.push_back(samples[i]);
    for (auto i : val_idx) out.second.push_back(samples[i]);
    return out;
}

inline std::pair<std::vector<LabeledText>, std::vector<LabeledText>> ratio_split(
    const std::vector<LabeledText>& samples, double train_fraction, std::uint64_t seed) {
    return ratio_split(samples, train_fraction, seed, [](const LabeledText& s) { return s.class_index(); });
}

/// Balanced inverse-frequency weights w_c = N / (C * n_c).
inline ClassWeights class_weights(const std::vector<std::size_t>& counts) {
    if (counts.empty()) throw ConfigError("class_weights: no classes");
    double total = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw DataError("empty class: class " + std::to_string(c) + " has no samples");
        total += static_cast<double>(counts[c]);
    }
    ClassWeights w;
    const double classes = static_cast<double>(counts.size());
    for (auto n : counts) w.weights.push_back(total / (classes * static_cast<double>(n)));
    return w;
}

inline std::vector<std::size_t> class_counts(const std::vector<LabeledText>& rows, std::size_t classes) {
    std::vector<std::size_t> c(classes, 0);
    for (const auto& r : rows) ++c.at(static_cast<std::size_t>(r.class_index()));
    return c;
}

}  // namespace stancelab
