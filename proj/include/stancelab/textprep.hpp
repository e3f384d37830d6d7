// Social-media text normalization, hashtag segmentation, vocabulary and
// fixed-length encoding.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stancelab/util.hpp"

namespace stancelab {

struct NormalizerConfig {
    bool classical_mode = false;  // stemming + stop-word removal
    std::size_t squeeze_len = 2;
    std::string url_token = "<url>";
    std::string user_token = "<user>";
    std::unordered_map<std::string, std::string> replacements;  // variant -> canonical
};

/// `variant<TAB>canonical` per line; blank lines and `#` comments ignored.
inline std::unordered_map<std::string, std::string> load_replacement_lexicon(const std::filesystem::path& path) {
    std::unordered_map<std::string, std::string> out;
    auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        auto f = split(line, '\t');
        if (f.size() != 2)
            throw DataError(path.string() + " line " + std::to_string(i + 1) + ": expected variant<TAB>canonical");
        out[to_lower(trim(f[0]))] = to_lower(trim(f[1]));
    }
    return out;
}

namespace detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Martin Porter's 1980 suffix-stripping stemmer, operating on a lowercase ASCII word.
class PorterStemmer {
public:
    std::string operator()(std::string word) {
        if (word.size() <= 2) return word;
        for (char c : word)
            if (c < 'a' || c > 'z') return word;
        b_ = std::move(word);
        k_ = static_cast<int>(b_.size()) - 1;
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
        return b_;
    }

private:
    std::string b_;
    int k_ = 0;
    int j_ = 0;

    char at(int i) const { return b_[static_cast<std::size_t>(i)]; }

    bool cons(int i) const {
        switch (at(i)) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(i - 1);
            default: return true;
        }
    }

    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0, i = 0;
        for (;;) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        for (;;) {
            for (;;) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            for (;;) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool double_cons(int j) const { return j >= 1 && at(j) == at(j - 1) && cons(j); }

    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = at(i);
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (std::string_view(b_).substr(static_cast<std::size_t>(k_ + 1 - len), s.size()) != s) return false;
        j_ = k_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
    }

    void r(std::string_view s) {
        if (m() > 0) set_to(s);
    }

    void step1ab() {
        if (at(k_) == 's') {
            if (ends("sses")) k_ -= 2;
            else if (ends("ies")) set_to("i");
            else if (at(k_ - 1) != 's') --k_;
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) set_to("ate");
            else if (ends("bl")) set_to("ble");
            else if (ends("iz")) set_to("ize");
            else if (double_cons(k_)) {
                --k_;
                char ch = at(k_);
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1 && cvc(k_)) {
                set_to("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }

    void step2() {
        switch (at(k_ - 1)) {
            case 'a':
                if (ends("ational")) { r("ate"); break; }
                if (ends("tional")) { r("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { r("ence"); break; }
                if (ends("anci")) { r("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { r("ize"); break; }
                break;
            case 'l':
                if (ends("bli")) { r("ble"); break; }
                if (ends("alli")) { r("al"); break; }
                if (ends("entli")) { r("ent"); break; }
                if (ends("eli")) { r("e"); break; }
                if (ends("ousli")) { r("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { r("ize"); break; }
                if (ends("ation")) { r("ate"); break; }
                if (ends("ator")) { r("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { r("al"); break; }
                if (ends("iveness")) { r("ive"); break; }
                if (ends("fulness")) { r("ful"); break; }
                if (ends("ousness")) { r("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { r("al"); break; }
                if (ends("iviti")) { r("ive"); break; }
                if (ends("biliti")) { r("ble"); break; }
                break;
            case 'g':
                if (ends("logi")) { r("log"); break; }
                break;
            default: break;
        }
    }

    void step3() {
        switch (at(k_)) {
            case 'e':
                if (ends("icate")) { r("ic"); break; }
                if (ends("ative")) { r(""); break; }
                if (ends("alize")) { r("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { r("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { r("ic"); break; }
                if (ends("ful")) { r(""); break; }
                break;
            case 's':
                if (ends("ness")) { r(""); break; }
                break;
            default: break;
        }
    }

    void step4() {
        switch (at(k_ - 1)) {
            case 'a': if (ends("al")) break; return;
            case 'c': if (ends("ance") || ends("ence")) break; return;
            case 'e': if (ends("er")) break; return;
            case 'i': if (ends("ic")) break; return;
            case 'l': if (ends("able") || ends("ible")) break; return;
            case 'n': if (ends("ant") || ends("ement") || ends("ment") || ends("ent")) break; return;
            case 'o':
                if (ends("ion") && j_ >= 0 && (at(j_) == 's' || at(j_) == 't')) break;
                if (ends("ou")) break;
                return;
            case 's': if (ends("ism")) break; return;
            case 't': if (ends("ate") || ends("iti")) break; return;
            case 'u': if (ends("ous")) break; return;
            case 'v': if (ends("ive")) break; return;
            case 'z': if (ends("ize")) break; return;
            default: return;
        }
        if (m() > 1) k_ = j_;
    }

    void step5() {
        j_ = k_;
        if (at(k_) == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (at(k_) == 'l' && double_cons(k_) && m() > 1) --k_;
    }
};

inline const std::unordered_set<std::string>& stop_words() {
    static const std::unordered_set<std::string> words = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as",
        "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can",
        "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had",
        "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
        "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my", "myself",
        "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours",
        "ourselves", "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that",
        "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
        "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when",
        "where", "which", "while", "who", "whom", "why", "will", "with", "you", "your", "yours",
        "yourself", "yourselves"};
    return words;
}

inline bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

}  // namespace detail

inline std::string porter_stem(std::string word) { return detail::PorterStemmer{}(std::move(word)); }

/// Lowercase, replace URLs and @mentions, squeeze character runs, apply the
/// replacement lexicon; stem and drop stop words only in classical mode.
inline std::string normalize(std::string_view raw, const NormalizerConfig& rules = {}) {
    std::vector<std::string> tokens;
    for (auto& word : split_whitespace(to_lower(raw))) {
        if (detail::starts_with(word, "http://") || detail::starts_with(word, "https://") ||
            detail::starts_with(word, "www.")) {
            tokens.push_back(rules.url_token);
            continue;
        }
        std::string tok;
        std::size_t run = 0;
        for (std::size_t i = 0; i < word.size(); ++i) {
            run = (i > 0 && word[i] == word[i - 1]) ? run + 1 : 1;
            if (rules.squeeze_len == 0 || run <= rules.squeeze_len) tok += word[i];
        }
        std::string out;
        for (std::size_t i = 0; i < tok.size();) {
            if (tok[i] == '@' && i + 1 < tok.size() && detail::is_word_char(tok[i + 1])) {
                std::size_t j = i + 1;
                while (j < tok.size() && detail::is_word_char(tok[j])) ++j;
                out += rules.user_token;
                i = j;
            } else {
                out += tok[i++];
            }
        }
        if (auto it = rules.replacements.find(out); it != rules.replacements.end()) out = it->second;
        if (!out.empty()) tokens.push_back(std::move(out));
    }

    if (rules.classical_mode) {
        std::vector<std::string> kept;
        for (auto& t : tokens) {
            if (detail::stop_words().count(t)) continue;
            if (t == rules.url_token || t == rules.user_token) kept.push_back(t);
            else kept.push_back(porter_stem(t));
        }
        tokens = std::move(kept);
    }
    return join(tokens, " ");
}

/// Rank-ordered word list with Zipf costs ln(rank * ln(V + 1)).
class SegmentationLexicon {
public:
    static constexpr std::size_t kMaxPieceLength = 24;
    static constexpr double kUnknownCostPerChar = 9.999;

    SegmentationLexicon() = default;

    explicit SegmentationLexicon(const std::vector<std::string>& words) {
        const double log_v = std::log(static_cast<double>(words.size()) + 1.0);
        for (std::size_t i = 0; i < words.size(); ++i) {
            const std::string& w = words[i];
            if (w.empty()) throw DataError("segmentation lexicon: empty word at rank " + std::to_string(i + 1));
            for (char c : w)
                if (!(std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'z')))
                    throw DataError("segmentation lexicon: '" + w + "' is not lowercase alphanumeric");
            if (!cost_.emplace(w, std::log(static_cast<double>(i + 1) * log_v)).second)
                throw DataError("segmentation lexicon: duplicate word '" + w + "'");
            words_.push_back(w);
        }
    }

    static SegmentationLexicon from_file(const std::filesystem::path& path) {
        std::vector<std::string> words;
        for (auto& line : read_lines(path)) {
            std::string w(trim(line));
            if (!w.empty()) words.push_back(w);
        }
        return SegmentationLexicon(words);
    }

    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }

    /// Zipf cost for lexicon words; 9.999 per character otherwise.
    double piece_cost(std::string_view piece) const {
        if (auto it = cost_.find(std::string(piece)); it != cost_.end()) return it->second;
        return kUnknownCostPerChar * static_cast<double>(piece.size());
    }

    bool contains(std::string_view w) const { return cost_.count(std::string(w)) != 0; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, double> cost_;
};

/// Lowercased ASCII alphanumeric content of a hashtag body.
inline std::string clean_hashtag(std::string_view tag) {
    std::string out;
    for (char c : tag)
        if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Minimum-cost segmentation; ties go to fewer pieces, then to the
/// lexicographically smaller piece list.
inline std::vector<std::string> segment_hashtag(std::string_view tag, const SegmentationLexicon& lexicon) {
    // Costs equal up to summation order count as ties.
    constexpr double kCostTolerance = 1e-9;
    const std::string s = clean_hashtag(tag);
    const std::size_t n = s.size();
    if (n == 0) return {};

    struct Best {
        double cost = 0;
        std::size_t count = 0;
        std::vector<std::string> pieces;
        bool set = false;
    };
    std::vector<Best> best(n + 1);
    best[0].set = true;
    for (std::size_t i = 1; i <= n; ++i) {
        auto consider = [&](std::size_t j) {
            std::string piece = s.substr(j, i - j);
            double c = best[j].cost + lexicon.piece_cost(piece);
            std::size_t cnt = best[j].count + 1;
            Best& b = best[i];
            if (b.set) {
                if (c > b.cost + kCostTolerance) return;
                if (c >= b.cost - kCostTolerance) {
                    if (cnt > b.count) return;
                    if (cnt == b.count) {
                        auto cand = best[j].pieces;
                        cand.push_back(piece);
                        if (!(cand < b.pieces)) return;
                        b.pieces = std::move(cand);
                        return;
                    }
                }
            }
            b.cost = c;
            b.count = cnt;
            b.pieces = best[j].pieces;
            b.pieces.push_back(std::move(piece));
            b.set = true;
        };
        const std::size_t max_k = std::min(i, SegmentationLexicon::kMaxPieceLength);
        for (std::size_t k = 1; k <= max_k; ++k) consider(i - k);
        // The whole prefix is always a candidate so unknown strings stay in one piece.
        if (i > SegmentationLexicon::kMaxPieceLength) consider(0);
    }
    return best[n].pieces;
}

/// Replace every `#tag` token by its segmentation joined with spaces.
inline std::string expand_hashtags(std::string_view text, const SegmentationLexicon& lexicon) {
    std::vector<std::string> out;
    for (auto& tok : split_whitespace(text)) {
        if (tok.size() > 1 && tok[0] == '#') {
            auto pieces = segment_hashtag(std::string_view(tok).substr(1), lexicon);
            if (!pieces.empty()) {
                out.push_back(join(pieces, " "));
                continue;
            }
        }
        out.push_back(tok);
    }
    return join(out, " ");
}

/// Hashtag expansion (when a lexicon is supplied) followed by normalization.
inline std::string preprocess(std::string_view raw, const NormalizerConfig& rules,
                              const SegmentationLexicon* lexicon = nullptr) {
    if (lexicon && lexicon->size() > 0) return normalize(expand_hashtags(raw, *lexicon), rules);
    return normalize(raw, rules);
}

class Vocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr std::string_view kPadToken = "<pad>";
    static constexpr std::string_view kUnkToken = "<unk>";

    Vocab() : tokens_{std::string(kPadToken), std::string(kUnkToken)} {}

    /// Tokens in id order, the first two being the reserved entries.
    static Vocab from_tokens(const std::vector<std::string>& tokens) {
        if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken)
            throw DataError("vocab: first two entries must be <pad> and <unk>");
        Vocab v;
        for (std::size_t i = 2; i < tokens.size(); ++i) v.add(tokens[i]);
        return v;
    }

    void add(const std::string& token) {
        if (token == kPadToken || token == kUnkToken) return;
        if (index_.emplace(token, static_cast<int>(tokens_.size())).second) tokens_.push_back(token);
        else throw DataError("vocab: duplicate token '" + token + "'");
    }

    int id(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? kUnk : it->second;
    }

    bool contains(const std::string& token) const { return index_.count(token) != 0; }
    const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    void save(const std::filesystem::path& path) const {
        std::string out;
        for (const auto& t : tokens_) out += t + '\n';
        write_file(path, out);
    }

    static Vocab load(const std::filesystem::path& path) { return from_tokens(read_lines(path)); }

    bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

/// Tokens ranked by (count desc, token asc); `max_size` counts the reserved entries.
inline Vocab build_vocab(const std::vector<std::string>& texts, std::size_t max_size, std::size_t min_count = 1) {
    if (texts.empty()) throw DataError("build_vocab: empty corpus");
    if (max_size < 2) throw ConfigError("build_vocab: max_size must leave room for <pad> and <unk>");
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& t : texts)
        for (auto& tok : split_whitespace(t)) ++counts[tok];
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (auto& [tok, c] : counts)
        if (c >= min_count && tok != Vocab::kPadToken && tok != Vocab::kUnkToken) ranked.emplace_back(tok, c);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Vocab v;
    for (auto& [tok, c] : ranked) {
        if (v.size() >= max_size) break;
        v.add(tok);
    }
    return v;
}

struct EncodedText {
    std::vector<int> ids;
    std::size_t true_length = 0;

    bool operator==(const EncodedText&) const = default;
};

/// Whitespace tokens to ids; unknown tokens map to UNK, truncated to L and right-padded.
inline EncodedText encode(std::string_view text, const Vocab& vocab, std::size_t max_len) {
    if (max_len < 1) throw ConfigError("encode: L must be at least 1");
    EncodedText e;
    e.ids.assign(max_len, Vocab::kPad);
    auto toks = split_whitespace(text);
    e.true_length = std::min(toks.size(), max_len);
    for (std::size_t i = 0; i < e.true_length; ++i) e.ids[i] = vocab.id(toks[i]);
    return e;
}

inline std::vector<std::string> decode(const EncodedText& e, const Vocab& vocab) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < e.true_length; ++i) out.push_back(vocab.token(e.ids[i]));
    return out;
}

}  // namespace stancelab
