#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debatenet/domain.hpp"
#include "debatenet/graph.hpp"
#include "debatenet/stats.hpp"

namespace debatenet {

// ---------------------------------------------------------------------------
// Ingestion

struct IngestOptions {
    std::string lang = "en";
    bool language_first = true;  // otherwise states are matched before the language filter
};

// Every input tweet lands in exactly one bucket: input = sum of the other four.
struct IngestCounts {
    std::size_t input = 0;
    std::size_t excluded_language = 0;
    std::size_t excluded_multi = 0;
    std::size_t excluded_none = 0;
    std::size_t kept = 0;
};

struct ProcessedTweet {
    std::string tweet_id;
    std::string author_id;
    std::size_t state = 0;          // index into the state list
    std::vector<std::string> urls;  // resolved, deduplicated within the tweet
};

struct IngestResult {
    std::vector<ProcessedTweet> tweets;
    std::vector<InteractionRecord> interactions;  // from kept retweets, aggregated and sorted
    IngestCounts counts;
    bool language_first = true;
};

/// Applies the language and single-state filters, resolves short URLs through
/// `url_map`, and collects retweet interactions from the kept tweets. Throws
/// InputError on duplicate tweet ids.
IngestResult ingest_tweets(std::vector<TweetRecord> records, const StateMatcher& states,
                           const std::map<std::string, std::string>& url_map = {},
                           const IngestOptions& options = {});

// ---------------------------------------------------------------------------
// Classification

struct UrlInfo {
    std::string url;
    std::optional<std::string> domain;  // empty when the URL could not be parsed
    ReliabilityTag tag = ReliabilityTag::UNC;
    Orientation orientation = Orientation::none;
};

struct UrlClassification {
    std::vector<UrlInfo> urls;  // one per distinct URL, sorted
    std::size_t unparseable = 0;
};

UrlClassification classify_urls(std::span<const ProcessedTweet> tweets, const DomainTable& labels,
                                const PublicSuffixList& psl = PublicSuffixList::builtin());

struct UserRecord {
    std::string user_id;
    std::optional<int> community;
    std::optional<double> score;
    BotClass bot = BotClass::unclassified;
};

struct UserClassification {
    std::vector<UserRecord> users;  // tweet authors and community members, sorted
    std::optional<BotClassification> deciles;
    std::size_t validated_users = 0;
    std::size_t scored_users = 0;  // validated users with a bot score
    std::vector<std::string> notices;
};

/// Deciles are taken over the users that carry a community label and a score.
/// Fewer than 10 such users leaves everyone unclassified, with a notice.
UserClassification classify_users(std::span<const ProcessedTweet> tweets,
                                  const std::map<std::string, int>& communities,
                                  std::span<const BotScoreRecord> scores);

// ---------------------------------------------------------------------------
// Report

struct ReportInputs {
    std::vector<ProcessedTweet> tweets;
    std::vector<StateSpec> states;
    std::map<std::string, int> communities;  // assigned users only
    std::vector<UrlInfo> urls;
    std::vector<UserRecord> users;
    bool has_orientation = false;
    bool has_bots = false;
    std::optional<IngestCounts> ingest;
};

using Percent = std::optional<double>;  // empty when the denominator is zero

struct StateRow {
    std::string state;
    StateKind kind = StateKind::safe;
    std::size_t tweets = 0;
    std::size_t urls = 0;
};

struct CommunityRow {
    std::string group;
    std::size_t users = 0;
    std::size_t tweets = 0;
    Percent safe_pct;
    Percent swing_pct;
    std::size_t urls = 0;
    Percent left_pct;
    Percent right_pct;
};

struct ReliabilityRow {
    std::string group;
    std::string kind;  // swing, safe or all
    std::size_t users = 0;
    std::size_t tweets = 0;
    std::size_t urls = 0;
    std::array<std::size_t, kTagCount> counts{};
    std::array<Percent, kTagCount> pct{};
};

struct BotAccountRow {
    std::string group;
    BotClass bot = BotClass::human;
    std::size_t users = 0;
    std::size_t tweets = 0;
    std::size_t urls = 0;
};

struct BotTrafficRow {
    std::string link_class;  // all, T or N
    std::string group;
    std::size_t urls = 0;
    Percent swing_pct;
    Percent safe_pct;
    Percent bot_pct;
    Percent human_pct;
    Percent swing_bot_pct;
    Percent swing_human_pct;
    Percent safe_bot_pct;
    Percent safe_human_pct;
};

struct ViralityRow {
    std::string group;
    std::string kind;
    std::string tag;  // all or a reliability tag
    std::size_t distinct_urls = 0;
    std::size_t shares = 0;
    std::optional<double> mean;
    std::optional<double> median;
};

struct UrlShareRow {
    std::string group;
    std::string kind;
    std::string url;
    ReliabilityTag tag = ReliabilityTag::UNC;
    std::size_t shares = 0;
};

struct ReportTables {
    std::optional<IngestCounts> ingest;
    std::vector<std::string> groups;
    std::vector<StateRow> states;
    std::vector<CommunityRow> communities;
    std::vector<ReliabilityRow> reliability;
    std::vector<BotAccountRow> bot_accounts;
    std::vector<BotTrafficRow> bot_traffic;
    std::vector<ViralityRow> virality;
    std::vector<UrlShareRow> url_shares;
    bool has_orientation = false;
    bool has_bots = false;
    std::vector<std::string> notices;
};

inline constexpr const char* kValidatedGroup = "validated";
inline constexpr const char* kUnassignedGroup = "unassigned";
inline constexpr const char* kDatasetGroup = "dataset";

std::string community_group(int label);

/// Aggregates the per-state, per-community, reliability, bot and virality tables.
/// A URL counts once per tweet that carries it. Tweets whose author has no community
/// go to the "unassigned" group; "validated" is the union of all communities.
ReportTables aggregate_reports(const ReportInputs& inputs);

struct NamedTest {
    std::string test;    // chi_square, ks or mwu
    std::string sample_a;
    std::string sample_b;
    std::string scope;   // all tweets or URL-bearing tweets only
    TestResult result;
};

struct ReportTests {
    std::vector<NamedTest> tests;
    std::vector<std::string> notices;
};

/// Chi-square on the validated swing/safe by T/N table, and KS plus Mann-Whitney on
/// per-tweet author bot scores for validated vs. communities 0 and 1 and between them.
ReportTests run_report_tests(const ReportInputs& inputs);

}  // namespace debatenet
