#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace debatenet {

// ---------------------------------------------------------------------------
// Tweets and states

struct TweetRecord {
    std::string tweet_id;
    std::string author_id;
    bool author_verified = false;
    std::string text;
    std::string lang;
    std::vector<std::string> urls;
    std::optional<std::string> retweeted_author_id;
    std::optional<bool> retweeted_author_verified;
    std::string timestamp;
};

enum class StateKind { swing, safe };

std::string to_string(StateKind kind);
StateKind parse_state_kind(std::string_view name);

struct StateSpec {
    std::string name;
    StateKind kind = StateKind::safe;
};

struct StateAssignment {
    enum class Status { matched, excluded_multi, excluded_none };
    Status status = Status::excluded_none;
    std::size_t state = 0;  // index into the state list when matched
};

// Case-insensitive whole-phrase matcher. Text is split into runs of letters and digits,
// so "#Florida" and "Florida's" both contain the token "florida"; multi-word names must
// appear as consecutive tokens. At each position the longest name wins, so
// "West Virginia" does not also count as "Virginia".
class StateMatcher {
public:
    /// Throws InputError when the list is empty or names collide case-insensitively.
    explicit StateMatcher(std::vector<StateSpec> states);

    StateAssignment assign(std::string_view text) const;
    const std::vector<StateSpec>& states() const noexcept { return states_; }

private:
    std::vector<StateSpec> states_;
    std::vector<std::vector<std::string>> phrases_;
    std::size_t longest_ = 0;
};

StateAssignment assign_state(std::string_view text, const std::vector<StateSpec>& states);

/// Lowercased letter/digit runs; bytes >= 0x80 count as letters.
std::vector<std::string> tokenize(std::string_view text);

struct LanguageFiltered {
    std::vector<TweetRecord> kept;
    std::size_t removed = 0;
};

/// Keeps records whose language code equals `lang` (ASCII case-insensitive).
LanguageFiltered filter_language(std::vector<TweetRecord> records, std::string_view lang = "en");

// ---------------------------------------------------------------------------
// Domains

class PublicSuffixList {
public:
    /// Rules in the publicsuffix.org format; comments and blank lines are ignored.
    static PublicSuffixList parse(std::string_view text);
    /// The ICANN section of the list compiled into the library.
    static const PublicSuffixList& builtin();

    /// Registrable domain of a bare host name, or nothing when the host is itself a
    /// public suffix or malformed.
    std::optional<std::string> registrable_domain_of_host(std::string_view host) const;

    std::size_t rule_count() const noexcept { return rules_.size() + wildcards_.size() + exceptions_.size(); }

private:
    std::unordered_set<std::string> rules_;
    std::unordered_set<std::string> wildcards_;   // "*.ck" stored as "ck"
    std::unordered_set<std::string> exceptions_;  // "!www.ck" stored as "www.ck"
};

/// Host of a URL (scheme optional), lowercased, without userinfo, port or trailing dot.
std::optional<std::string> url_host(std::string_view url);

/// Registrable (second-level) domain of a URL, e.g. "https://www.nytimes.com/x" ->
/// "nytimes.com", "http://news.bbc.co.uk" -> "bbc.co.uk". Empty when unparseable.
std::optional<std::string> registrable_domain(std::string_view url,
                                              const PublicSuffixList& psl = PublicSuffixList::builtin());

// ---------------------------------------------------------------------------
// Reliability

enum class ReliabilityTag { T, N, P, S, UNC };

inline constexpr std::size_t kTagCount = 5;
inline constexpr ReliabilityTag kAllTags[kTagCount] = {ReliabilityTag::T, ReliabilityTag::N, ReliabilityTag::P,
                                                       ReliabilityTag::S, ReliabilityTag::UNC};

std::string to_string(ReliabilityTag tag);
ReliabilityTag parse_tag(std::string_view name);

enum class Orientation { none, left, right };

std::string to_string(Orientation o);
/// "Far Left", "slightly left", ... -> left; likewise right; anything else -> none.
Orientation parse_orientation(std::string_view text);

struct DomainLabel {
    std::string domain;
    ReliabilityTag tag = ReliabilityTag::UNC;
    std::optional<std::string> orientation;
};

class DomainTable {
public:
    DomainTable() = default;
    /// Throws InputError on conflicting duplicate domains.
    explicit DomainTable(std::vector<DomainLabel> labels);

    ReliabilityTag classify(std::string_view domain) const;
    Orientation orientation(std::string_view domain) const;
    bool has_orientation() const noexcept { return has_orientation_; }
    std::size_t size() const noexcept { return labels_.size(); }

private:
    std::unordered_map<std::string, DomainLabel> labels_;
    bool has_orientation_ = false;
};

/// Exact lookup of a registrable domain; unknown domains are UNC.
inline ReliabilityTag classify_reliability(std::string_view domain, const DomainTable& labels) {
    return labels.classify(domain);
}

// ---------------------------------------------------------------------------
// Bots

enum class BotClass { human, bot, unclassified };

std::string to_string(BotClass c);
BotClass parse_bot_class(std::string_view name);

struct BotScoreRecord {
    std::string user_id;
    double score = 0.0;
};

struct BotClassification {
    std::map<std::string, BotClass> classes;
    std::map<std::string, double> scores;
    std::optional<double> human_max;  // largest score classified human
    std::optional<double> bot_min;    // smallest score classified bot
    std::size_t humans = 0;
    std::size_t bots = 0;
    std::vector<std::string> warnings;
};

/// Lowest decile of distinct users -> human, highest decile -> bot, everything else
/// unclassified. A decile holds floor(n / 10) users; users tied with the first
/// unclassified score stay unclassified. Throws InputError for fewer than 10 users,
/// scores outside [0, 1], or one user with two different scores.
BotClassification decile_bot_classification(std::span<const BotScoreRecord> scores);

}  // namespace debatenet
