// Per-target label counts (InFavor, Against, None) of the SemEval-2016 and
// MPCHI stance corpora, and the published sizes of their leave-one-out
// training pools.
#pragma once

#include <vector>

#include "stancelab/synthetic.hpp"

namespace testing_support {

inline std::vector<stancelab::synthetic::TargetCounts> semeval_counts() {
    return {{"AT", {92, 304, 117}, {32, 160, 28}},
            {"CC", {212, 15, 168}, {123, 11, 35}},
            {"FM", {210, 328, 126}, {58, 183, 44}},
            {"HC", {112, 361, 166}, {45, 172, 78}},
            {"LA", {105, 334, 164}, {46, 189, 45}}};
}

inline std::vector<stancelab::synthetic::TargetCounts> mpchi_counts() {
    return {{"MMR", {48, 61, 72}, {24, 33, 21}},
            {"SC", {68, 51, 117}, {35, 26, 42}},
            {"EC", {60, 118, 111}, {33, 47, 44}},
            {"VC", {74, 52, 68}, {37, 16, 31}},
            {"HRT", {33, 95, 44}, {9, 41, 24}}};
}

struct PoolCounts {
    const char* target;
    stancelab::StanceCounts train;
};

inline std::vector<PoolCounts> semeval_published_pools() {
    return {{"AT", {910, 1593, 826}}, {"CC", {699, 2031, 767}}, {"FM", {766, 1546, 800}},
            {"HC", {878, 1524, 726}}, {"LA", {883, 1534, 761}}};
}

inline std::vector<PoolCounts> mpchi_published_pools() {
    return {{"MMR", {314, 402, 425}}, {"SC", {279, 417, 365}}, {"EC", {301, 343, 376}},
            {"VC", {276, 424, 421}}, {"HRT", {342, 358, 453}}};
}

}  // namespace testing_support
