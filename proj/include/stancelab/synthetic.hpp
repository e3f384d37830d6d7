// Generated corpora with known structure: count-matched stance files, a
// marker-token stance task whose sarcastic samples flip their surface stance,
// and an imbalanced binary task.
#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "stancelab/corpus.hpp"
#include "stancelab/util.hpp"

namespace stancelab::synthetic {

/// Per-target label counts (InFavor, Against, None) for each split.
struct TargetCounts {
    std::string target;
    StanceCounts train{};
    StanceCounts test{};
};

/// A dataset whose per-(target, split, label) counts are exactly `counts`.
/// Texts are placeholders; ids are unique across the dataset.
inline StanceDataset count_matched_dataset(const std::string& name, const std::vector<TargetCounts>& counts) {
    StanceDataset ds;
    ds.name = name;
    std::size_t next = 0;
    for (const auto& tc : counts) {
        ds.targets.push_back(tc.target);
        for (Split s : {Split::Train, Split::Test}) {
            const auto& c = s == Split::Train ? tc.train : tc.test;
            auto& part = ds.partitions[{tc.target, s}];
            for (std::size_t label = 0; label < kStanceClasses; ++label)
                for (std::size_t i = 0; i < c[label]; ++i) {
                    std::string id = name + "-" + std::to_string(next++);
                    part.push_back(LabeledText{id, tc.target, "text " + id, static_cast<StanceLabel>(label)});
                }
        }
    }
    return ds;
}

struct TransferCorpusOptions {
    std::string name = "synthetic";
    std::string sarcasm_name = "ST";
    std::vector<std::string> targets{"T"};
    std::size_t train_per_target = 2000;
    std::size_t test_per_target = 500;
    std::size_t sarcasm_size = 1000;
    double sarcastic_fraction = 0.35;
    std::size_t length = 10;       // tokens per text
    std::size_t markers = 4;       // per class
    std::size_t fillers = 40;
    std::size_t cues = 10;         // sarcasm cue tokens; first half in stance train, second half in stance test
    double flip_rate = 0.3;        // share of Against samples written with InFavor markers plus a cue
};

struct TransferCorpus {
    StanceDataset stance;
    SarcasmDataset sarcasm;
    std::set<std::string> flipped_ids;  // Against samples whose surface reads InFavor
};

namespace detail {

inline std::string marker(std::size_t label, std::size_t i) {
    static constexpr const char* prefix[] = {"fav", "aga", "non"};
    return prefix[label] + std::to_string(i);
}

inline std::string filler(std::size_t i) { return "w" + std::to_string(i); }
inline std::string cue(std::size_t i) { return "cue" + std::to_string(i); }

/// `length` filler tokens with `special` placed at distinct random positions.
inline std::string compose(const std::vector<std::string>& special, std::size_t length, std::size_t fillers, Rng& rng) {
    std::vector<std::string> toks(std::max(length, special.size()));
    for (auto& t : toks) t = filler(static_cast<std::size_t>(rng.below(fillers)));
    std::vector<std::size_t> pos(toks.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
    rng.shuffle(pos);
    for (std::size_t i = 0; i < special.size(); ++i) toks[pos[i]] = special[i];
    return join(toks, " ");
}

}  // namespace detail

/// Stance classes are keyed to class marker tokens. A `flip_rate` share of
/// Against samples carries two InFavor markers plus a sarcasm cue instead;
/// the cues seen in stance training and in stance test are disjoint, while
/// the sarcasm corpus labels a sample sarcastic exactly when it holds any cue.
inline TransferCorpus make_transfer_corpus(const TransferCorpusOptions& o, std::uint64_t seed) {
    if (o.cues < 2 || o.markers < 1 || o.fillers < 1 || o.length < 3)
        throw ConfigError("make_transfer_corpus: need cues >= 2, markers >= 1, fillers >= 1, length >= 3");
    Rng rng(seed);
    TransferCorpus out;
    out.stance.name = o.name;
    const std::size_t half = o.cues / 2;
    std::size_t next = 0;
    for (const auto& target : o.targets) {
        out.stance.targets.push_back(target);
        for (Split s : {Split::Train, Split::Test}) {
            const std::size_t n = s == Split::Train ? o.train_per_target : o.test_per_target;
            auto& part = out.stance.partitions[{target, s}];
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t label = i % kStanceClasses;
                std::vector<std::string> special;
                std::string id = o.name + "-" + target + "-" + std::to_string(next++);
                if (label == static_cast<std::size_t>(StanceLabel::Against) && rng.bernoulli(o.flip_rate)) {
                    const std::size_t lo = s == Split::Train ? 0 : half;
                    const std::size_t hi = s == Split::Train ? half : o.cues;
                    special = {detail::marker(0, static_cast<std::size_t>(rng.below(o.markers))),
                               detail::marker(0, static_cast<std::size_t>(rng.below(o.markers))),
                               detail::cue(lo + static_cast<std::size_t>(rng.below(hi - lo)))};
                    out.flipped_ids.insert(id);
                } else {
                    special = {detail::marker(label, static_cast<std::size_t>(rng.below(o.markers))),
                               detail::marker(label, static_cast<std::size_t>(rng.below(o.markers)))};
                }
                part.push_back(LabeledText{id, target, detail::compose(special, o.length, o.fillers, rng),
                                           static_cast<StanceLabel>(label)});
            }
        }
    }

    out.sarcasm.name = o.sarcasm_name;
    for (std::size_t i = 0; i < o.sarcasm_size; ++i) {
        const bool sarcastic = rng.bernoulli(o.sarcastic_fraction);
        std::vector<std::string> special{
            detail::marker(static_cast<std::size_t>(rng.below(kStanceClasses)), static_cast<std::size_t>(rng.below(o.markers)))};
        if (sarcastic) special.push_back(detail::cue(static_cast<std::size_t>(rng.below(o.cues))));
        out.sarcasm.samples.push_back(LabeledText{o.sarcasm_name + "-" + std::to_string(i), std::nullopt,
                                                  detail::compose(special, o.length, o.fillers, rng),
                                                  sarcastic ? SarcasmLabel::Sarcastic : SarcasmLabel::NotSarcastic});
    }
    return out;
}

struct ImbalancedOptions {
    std::size_t size = 1000;
    double minority_fraction = 0.1;
    double marker_in_minority = 0.6;
    double marker_in_majority = 0.1;
    std::size_t length = 8;
    std::size_t fillers = 20;
};

/// Binary task (label 1 = minority) where a single marker token is more
/// frequent in the minority class but, given the class prior, still more
/// likely to come from the majority.
inline std::vector<LabeledText> make_imbalanced_binary(const ImbalancedOptions& o, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledText> out;
    const auto minority = static_cast<std::size_t>(std::llround(o.minority_fraction * static_cast<double>(o.size)));
    for (std::size_t i = 0; i < o.size; ++i) {
        const bool is_minority = i < minority;
        std::vector<std::string> special;
        if (rng.bernoulli(is_minority ? o.marker_in_minority : o.marker_in_majority)) special.push_back("mark");
        out.push_back(LabeledText{"b" + std::to_string(i), std::nullopt, detail::compose(special, o.length, o.fillers, rng),
                                  is_minority ? SarcasmLabel::Sarcastic : SarcasmLabel::NotSarcastic});
    }
    rng.shuffle(out);
    return out;
}

}  // namespace stancelab::synthetic
