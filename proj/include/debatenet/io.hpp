#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "debatenet/bicm.hpp"
#include "debatenet/community.hpp"
#include "debatenet/domain.hpp"
#include "debatenet/graph.hpp"
#include "debatenet/pipeline.hpp"
#include "debatenet/projection.hpp"
#include "debatenet/stats.hpp"

namespace debatenet::io {

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

/// Shortest decimal form that round-trips.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// CSV (RFC 4180: quoted fields, doubled quotes, CRLF or LF)

class CsvTable {
public:
    CsvTable(std::string source, std::vector<std::string> header, std::vector<std::vector<std::string>> rows,
             std::vector<std::size_t> lines);

    const std::string& source() const noexcept { return source_; }
    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<std::string>& row(std::size_t i) const { return rows_.at(i); }
    std::size_t line(std::size_t i) const { return lines_.at(i); }

    std::optional<std::size_t> column(std::string_view name) const;
    /// Throws InputError naming the file when the column is missing.
    std::size_t require(std::string_view name) const;
    [[noreturn]] void fail(std::size_t row, const std::string& message) const;

    std::int64_t integer(std::size_t row, std::size_t col) const;
    double real(std::size_t row, std::size_t col) const;
    bool boolean(std::size_t row, std::size_t col) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> lines_;  // 1-based line where each row starts
};

/// Throws InputError on unbalanced quotes or rows whose width differs from the header.
CsvTable parse_csv(std::string_view text, std::string source);
CsvTable read_csv(const std::filesystem::path& path);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add(const std::vector<std::string>& row);
    const std::string& str() const noexcept { return out_; }

private:
    std::size_t width_;
    std::string out_;
};

// ---------------------------------------------------------------------------
// Pipeline inputs

std::vector<TweetRecord> parse_tweets_jsonl(std::string_view text, const std::string& source);
std::vector<StateSpec> read_states(const std::filesystem::path& path);
std::vector<DomainLabel> read_domain_labels(const std::filesystem::path& path);
std::vector<BotScoreRecord> read_bot_scores(const std::filesystem::path& path);
std::map<std::string, std::string> read_url_map(const std::filesystem::path& path);

/// Columns retweeter_id, author_id, author_verified, count and optionally
/// retweeter_verified.
std::vector<InteractionRecord> read_interactions(const std::filesystem::path& path);
std::string interactions_csv(const std::vector<InteractionRecord>& records);

// ---------------------------------------------------------------------------
// Stage artifacts

std::string processed_tweets_jsonl(const std::vector<ProcessedTweet>& tweets, const std::vector<StateSpec>& states);
std::vector<ProcessedTweet> parse_processed_tweets(std::string_view text, const std::vector<StateSpec>& states,
                                                   const std::string& source);

std::string ingest_json(const IngestCounts& counts, bool language_first, const std::string& lang,
                        const std::vector<StateSpec>& states, std::size_t interactions);
struct IngestSummary {
    IngestCounts counts;
    std::vector<StateSpec> states;
};
IngestSummary parse_ingest_json(std::string_view text);

struct ModelFile {
    BicmModel model;
    std::vector<std::string> top_ids;
    std::vector<std::string> bottom_ids;
};
/// Infinite multipliers (nodes linked to the whole opposite layer) are written as null.
std::string model_json(const BicmModel& model, const std::vector<std::string>& top_ids,
                       const std::vector<std::string>& bottom_ids);
ModelFile parse_model_json(std::string_view text);

std::string projection_csv(const ValidatedProjection& projection);
std::string projection_json(const ValidatedProjection& projection);
ValidatedProjection parse_projection_json(std::string_view text);

std::string partition_csv(const Partition& partition);
Partition parse_partition_csv(const CsvTable& table);
std::string communities_json(const CommunityDetection& detection);
std::string partition_json(const Partition& partition, std::size_t seeds);

std::string urls_csv(const UrlClassification& urls);
std::vector<UrlInfo> parse_urls_csv(const CsvTable& table);
std::string users_csv(const UserClassification& users);
std::vector<UserRecord> parse_users_csv(const CsvTable& table);
std::string classify_json(const UrlClassification& urls, const UserClassification& users, std::size_t labels,
                          bool has_orientation);

std::string test_result_json(const TestResult& result);
std::string report_tests_json(const ReportTests& tests);

std::string report_json(const ReportTables& report);
/// File name -> CSV content for every report table.
std::map<std::string, std::string> report_csv_tables(const ReportTables& report);

}  // namespace debatenet::io
