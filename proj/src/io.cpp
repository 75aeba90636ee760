#include "debatenet/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>
#include <unistd.h>

#include "debatenet/error.hpp"

namespace debatenet::io {

using json = nlohmann::ordered_json;

namespace {

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(what + ": " + e.what());
    }
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& what) {
    if (!obj.contains(key)) throw InputError(what + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(what + ": field '" + key + "': " + e.what());
    }
}

std::string hex(const unsigned char* data, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    return hex(md.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------

CsvTable::CsvTable(std::string source, std::vector<std::string> header, std::vector<std::vector<std::string>> rows,
                   std::vector<std::size_t> lines)
    : source_(std::move(source)), header_(std::move(header)), rows_(std::move(rows)), lines_(std::move(lines)) {}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t CsvTable::require(std::string_view name) const {
    auto col = column(name);
    if (!col) throw InputError(source_ + ": missing column '" + std::string(name) + "'");
    return *col;
}

void CsvTable::fail(std::size_t row, const std::string& message) const {
    throw InputError(source_ + " line " + std::to_string(line(row)) + ": " + message);
}

std::int64_t CsvTable::integer(std::size_t r, std::size_t c) const {
    const auto text = trim(row(r).at(c));
    std::int64_t value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        fail(r, "column '" + header_[c] + "': expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

double CsvTable::real(std::size_t r, std::size_t c) const {
    const std::string text(trim(row(r).at(c)));
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used == text.size()) return value;
    } catch (const std::exception&) {
    }
    fail(r, "column '" + header_[c] + "': expected a number, got '" + text + "'");
}

bool CsvTable::boolean(std::size_t r, std::size_t c) const {
    const std::string text = lower_ascii(trim(row(r).at(c)));
    if (text == "true" || text == "1" || text == "yes" || text == "t") return true;
    if (text == "false" || text == "0" || text == "no" || text == "f" || text.empty()) return false;
    fail(r, "column '" + header_[c] + "': expected true or false, got '" + text + "'");
}

CsvTable parse_csv(std::string_view text, std::string source) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> lines;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        const bool blank = record.size() == 1 && record[0].empty();
        if (!blank) {
            records.push_back(std::move(record));
            lines.push_back(record_line);
        }
        record.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            // handled by the following '\n'
        } else if (c == '\n') {
            end_record();
            ++line;
            record_line = line;
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) throw InputError(source + " line " + std::to_string(record_line) + ": unterminated quoted field");
    if (field_started || !record.empty()) end_record();

    if (records.empty()) throw InputError(source + ": empty file, expected a header row");
    std::vector<std::string> header = std::move(records.front());
    for (auto& h : header) h = std::string(trim(h));
    records.erase(records.begin());
    lines.erase(lines.begin());
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].size() != header.size()) {
            throw InputError(source + " line " + std::to_string(lines[r]) + ": expected " +
                             std::to_string(header.size()) + " fields, found " + std::to_string(records[r].size()));
        }
    }
    return CsvTable(std::move(source), std::move(header), std::move(records), std::move(lines));
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

namespace {

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { add(header); }

void CsvWriter::add(const std::vector<std::string>& row) {
    if (row.size() != width_) throw std::logic_error("CSV row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out_.push_back(',');
        out_ += csv_field(row[i]);
    }
    out_.push_back('\n');
}

// ---------------------------------------------------------------------------

namespace {

std::string id_field(const json& obj, const char* key, const std::string& what, bool required = true) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        if (required) throw InputError(what + ": missing field '" + key + "'");
        return {};
    }
    const auto& v = obj.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    throw InputError(what + ": field '" + key + "' must be a string or integer id");
}

}  // namespace

std::vector<TweetRecord> parse_tweets_jsonl(std::string_view text, const std::string& source) {
    std::vector<TweetRecord> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        const std::string what = source + " line " + std::to_string(line_no);
        const json obj = parse_json(line, what);
        if (!obj.is_object()) throw InputError(what + ": expected a JSON object");
        TweetRecord r;
        r.tweet_id = id_field(obj, "tweet_id", what);
        r.author_id = id_field(obj, "author_id", what);
        if (obj.contains("author_verified") && !obj["author_verified"].is_null()) {
            r.author_verified = get_field<bool>(obj, "author_verified", what);
        }
        if (obj.contains("text") && !obj["text"].is_null()) r.text = get_field<std::string>(obj, "text", what);
        if (obj.contains("lang") && !obj["lang"].is_null()) r.lang = get_field<std::string>(obj, "lang", what);
        if (obj.contains("urls") && !obj["urls"].is_null()) {
            r.urls = get_field<std::vector<std::string>>(obj, "urls", what);
        }
        if (auto id = id_field(obj, "retweeted_author_id", what, false); !id.empty()) r.retweeted_author_id = id;
        if (obj.contains("retweeted_author_verified") && !obj["retweeted_author_verified"].is_null()) {
            r.retweeted_author_verified = get_field<bool>(obj, "retweeted_author_verified", what);
        }
        if (obj.contains("timestamp") && !obj["timestamp"].is_null()) {
            const auto& ts = obj["timestamp"];
            r.timestamp = ts.is_string() ? ts.get<std::string>() : ts.dump();
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<StateSpec> read_states(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto name = t.require("name");
    const auto kind = t.require("kind");
    std::vector<StateSpec> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        try {
            out.push_back({std::string(trim(t.row(r)[name])), parse_state_kind(t.row(r)[kind])});
        } catch (const InputError& e) {
            t.fail(r, e.what());
        }
    }
    return out;
}

std::vector<DomainLabel> read_domain_labels(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto domain = t.require("domain");
    const auto tag = t.require("tag");
    const auto orientation = t.column("orientation");
    std::vector<DomainLabel> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        DomainLabel label;
        label.domain = std::string(trim(t.row(r)[domain]));
        if (label.domain.empty()) t.fail(r, "empty domain");
        try {
            label.tag = parse_tag(t.row(r)[tag]);
        } catch (const InputError& e) {
            t.fail(r, e.what());
        }
        if (orientation) {
            const auto o = trim(t.row(r)[*orientation]);
            if (!o.empty()) label.orientation = std::string(o);
        }
        out.push_back(std::move(label));
    }
    return out;
}

std::vector<BotScoreRecord> read_bot_scores(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto user = t.require("user_id");
    const auto score = t.require("score");
    std::vector<BotScoreRecord> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const double s = t.real(r, score);
        if (!(s >= 0.0 && s <= 1.0)) t.fail(r, "score must lie in [0, 1]");
        out.push_back({std::string(trim(t.row(r)[user])), s});
    }
    return out;
}

std::map<std::string, std::string> read_url_map(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto short_url = t.require("short_url");
    const auto resolved = t.require("resolved_url");
    std::map<std::string, std::string> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const std::string key(trim(t.row(r)[short_url]));
        const std::string value(trim(t.row(r)[resolved]));
        auto [it, inserted] = out.emplace(key, value);
        if (!inserted && it->second != value) t.fail(r, "conflicting resolution for '" + key + "'");
    }
    return out;
}

std::vector<InteractionRecord> read_interactions(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto retweeter = t.require("retweeter_id");
    const auto author = t.require("author_id");
    const auto verified = t.require("author_verified");
    const auto count = t.require("count");
    const auto retweeter_verified = t.column("retweeter_verified");
    std::vector<InteractionRecord> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        InteractionRecord rec;
        rec.retweeter = std::string(trim(t.row(r)[retweeter]));
        rec.author = std::string(trim(t.row(r)[author]));
        if (rec.retweeter.empty() || rec.author.empty()) t.fail(r, "empty user id");
        rec.author_verified = t.boolean(r, verified);
        rec.count = t.integer(r, count);
        if (retweeter_verified && !trim(t.row(r)[*retweeter_verified]).empty()) {
            rec.retweeter_verified = t.boolean(r, *retweeter_verified);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::string interactions_csv(const std::vector<InteractionRecord>& records) {
    CsvWriter w({"retweeter_id", "author_id", "author_verified", "count", "retweeter_verified"});
    for (const auto& r : records) {
        w.add({r.retweeter, r.author, r.author_verified ? "true" : "false", std::to_string(r.count),
               r.retweeter_verified ? (*r.retweeter_verified ? "true" : "false") : ""});
    }
    return w.str();
}

// ---------------------------------------------------------------------------

std::string processed_tweets_jsonl(const std::vector<ProcessedTweet>& tweets, const std::vector<StateSpec>& states) {
    std::string out;
    for (const auto& t : tweets) {
        json obj;
        obj["tweet_id"] = t.tweet_id;
        obj["author_id"] = t.author_id;
        obj["state"] = states.at(t.state).name;
        obj["kind"] = to_string(states.at(t.state).kind);
        obj["urls"] = t.urls;
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<ProcessedTweet> parse_processed_tweets(std::string_view text, const std::vector<StateSpec>& states,
                                                   const std::string& source) {
    std::map<std::string, std::size_t> index;
    for (std::size_t s = 0; s < states.size(); ++s) index[states[s].name] = s;
    std::vector<ProcessedTweet> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string what = source + " line " + std::to_string(line_no);
        const json obj = parse_json(line, what);
        ProcessedTweet t;
        t.tweet_id = get_field<std::string>(obj, "tweet_id", what);
        t.author_id = get_field<std::string>(obj, "author_id", what);
        const auto state = get_field<std::string>(obj, "state", what);
        auto it = index.find(state);
        if (it == index.end()) throw InputError(what + ": unknown state '" + state + "'");
        t.state = it->second;
        t.urls = get_field<std::vector<std::string>>(obj, "urls", what);
        out.push_back(std::move(t));
    }
    return out;
}

std::string ingest_json(const IngestCounts& counts, bool language_first, const std::string& lang,
                        const std::vector<StateSpec>& states, std::size_t interactions) {
    json doc;
    doc["lang"] = lang;
    doc["filter_order"] = language_first ? "language,state" : "state,language";
    doc["counts"] = {{"input", counts.input},
                     {"excluded_language", counts.excluded_language},
                     {"excluded_multi", counts.excluded_multi},
                     {"excluded_none", counts.excluded_none},
                     {"kept", counts.kept}};
    json st = json::array();
    for (const auto& s : states) st.push_back({{"name", s.name}, {"kind", to_string(s.kind)}});
    doc["states"] = st;
    doc["interactions"] = interactions;
    return dump(doc);
}

IngestSummary parse_ingest_json(std::string_view text) {
    const json doc = parse_json(text, "ingest.json");
    IngestSummary out;
    const auto& c = doc.at("counts");
    out.counts.input = c.at("input").get<std::size_t>();
    out.counts.excluded_language = c.at("excluded_language").get<std::size_t>();
    out.counts.excluded_multi = c.at("excluded_multi").get<std::size_t>();
    out.counts.excluded_none = c.at("excluded_none").get<std::size_t>();
    out.counts.kept = c.at("kept").get<std::size_t>();
    for (const auto& s : doc.at("states")) {
        out.states.push_back({s.at("name").get<std::string>(), parse_state_kind(s.at("kind").get<std::string>())});
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

json multipliers_json(const std::vector<double>& values) {
    json arr = json::array();
    for (double v : values) {
        if (std::isinf(v)) {
            arr.push_back(nullptr);
        } else {
            arr.push_back(v);
        }
    }
    return arr;
}

std::vector<double> multipliers_from(const json& arr) {
    std::vector<double> out;
    for (const auto& v : arr) out.push_back(v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>());
    return out;
}

}  // namespace

std::string model_json(const BicmModel& model, const std::vector<std::string>& top_ids,
                       const std::vector<std::string>& bottom_ids) {
    json doc;
    doc["model"] = "bicm";
    doc["top_count"] = model.top_count();
    doc["bottom_count"] = model.bottom_count();
    doc["fit_residual"] = model.fit_residual();
    const auto& s = model.solver();
    doc["solver"] = {{"tol", s.tol},
                     {"iterations", s.iterations},
                     {"newton_steps", s.newton_steps},
                     {"grouped", s.grouped},
                     {"blocks", s.blocks},
                     {"unknowns", s.unknowns}};
    doc["top"] = {{"ids", top_ids},
                  {"multipliers", multipliers_json(model.top_multipliers())},
                  {"blocks", model.top_blocks()}};
    doc["bottom"] = {{"ids", bottom_ids},
                     {"multipliers", multipliers_json(model.bottom_multipliers())},
                     {"blocks", model.bottom_blocks()}};
    json frozen = json::array();
    for (const auto& e : model.frozen_ones()) frozen.push_back({e.top, e.bottom});
    doc["frozen_ones"] = frozen;
    return dump(doc);
}

ModelFile parse_model_json(std::string_view text) {
    const json doc = parse_json(text, "model.json");
    try {
        ModelFile out;
        out.top_ids = doc.at("top").at("ids").get<std::vector<std::string>>();
        out.bottom_ids = doc.at("bottom").at("ids").get<std::vector<std::string>>();
        std::vector<Edge> frozen;
        for (const auto& e : doc.at("frozen_ones")) frozen.push_back({e.at(0).get<NodeIndex>(), e.at(1).get<NodeIndex>()});
        SolverInfo solver;
        const auto& s = doc.at("solver");
        solver.tol = s.at("tol").get<double>();
        solver.iterations = s.at("iterations").get<std::size_t>();
        solver.newton_steps = s.at("newton_steps").get<std::size_t>();
        solver.grouped = s.at("grouped").get<bool>();
        solver.blocks = s.at("blocks").get<std::size_t>();
        solver.unknowns = s.at("unknowns").get<std::size_t>();
        out.model = BicmModel(multipliers_from(doc.at("top").at("multipliers")),
                              multipliers_from(doc.at("bottom").at("multipliers")),
                              doc.at("top").at("blocks").get<std::vector<int>>(),
                              doc.at("bottom").at("blocks").get<std::vector<int>>(), std::move(frozen),
                              doc.at("fit_residual").get<double>(), solver);
        if (out.top_ids.size() != out.model.top_count() || out.bottom_ids.size() != out.model.bottom_count()) {
            throw InputError("model.json: id lists do not match the multiplier vectors");
        }
        return out;
    } catch (const json::exception& e) {
        throw InputError(std::string("model.json: ") + e.what());
    }
}

std::string projection_csv(const ValidatedProjection& p) {
    CsvWriter w({"source", "target", "pvalue"});
    for (const auto& e : p.edges) w.add({p.nodes.at(e.first), p.nodes.at(e.second), format_double(e.pvalue)});
    return w.str();
}

std::string projection_json(const ValidatedProjection& p) {
    json doc;
    doc["alpha"] = p.alpha;
    doc["correction"] = to_string(p.correction);
    doc["hypotheses"] = p.hypotheses;
    doc["threshold"] = p.threshold ? json(*p.threshold) : json(nullptr);
    doc["validated_edges"] = p.edges.size();
    doc["approximate"] = p.approximate;
    doc["exact_threshold"] = p.exact_threshold;
    doc["nodes"] = p.nodes;
    json edges = json::array();
    for (const auto& e : p.edges) {
        edges.push_back({{"source", p.nodes.at(e.first)},
                         {"target", p.nodes.at(e.second)},
                         {"count", e.count},
                         {"pvalue", e.pvalue}});
    }
    doc["edges"] = edges;
    return dump(doc);
}

ValidatedProjection parse_projection_json(std::string_view text) {
    const json doc = parse_json(text, "projection.json");
    try {
        ValidatedProjection p;
        p.alpha = doc.at("alpha").get<double>();
        p.correction = parse_correction(doc.at("correction").get<std::string>());
        p.hypotheses = doc.at("hypotheses").get<std::size_t>();
        if (!doc.at("threshold").is_null()) p.threshold = doc.at("threshold").get<double>();
        p.approximate = doc.at("approximate").get<bool>();
        p.exact_threshold = doc.at("exact_threshold").get<std::size_t>();
        p.nodes = doc.at("nodes").get<std::vector<std::string>>();
        std::map<std::string, NodeIndex> index;
        for (std::size_t i = 0; i < p.nodes.size(); ++i) index[p.nodes[i]] = static_cast<NodeIndex>(i);
        for (const auto& e : doc.at("edges")) {
            const auto a = index.find(e.at("source").get<std::string>());
            const auto b = index.find(e.at("target").get<std::string>());
            if (a == index.end() || b == index.end()) throw InputError("projection.json: edge references unknown node");
            p.edges.push_back({a->second, b->second, e.at("count").get<std::int64_t>(), e.at("pvalue").get<double>()});
        }
        return p;
    } catch (const json::exception& e) {
        throw InputError(std::string("projection.json: ") + e.what());
    }
}

std::string partition_csv(const Partition& p) {
    CsvWriter w({"node_id", "label", "origin"});
    for (std::size_t i = 0; i < p.ids.size(); ++i) {
        w.add({p.ids[i], p.labels[i] < 0 ? "" : std::to_string(p.labels[i]), to_string(p.origins[i])});
    }
    return w.str();
}

Partition parse_partition_csv(const CsvTable& t) {
    const auto node = t.require("node_id");
    const auto label = t.require("label");
    const auto origin = t.require("origin");
    Partition p;
    for (std::size_t r = 0; r < t.size(); ++r) {
        p.ids.push_back(t.row(r)[node]);
        p.labels.push_back(trim(t.row(r)[label]).empty() ? -1 : static_cast<int>(t.integer(r, label)));
        try {
            p.origins.push_back(parse_origin(t.row(r)[origin]));
        } catch (const InputError& e) {
            t.fail(r, e.what());
        }
        if (p.labels.back() < 0 && p.origins.back() != Origin::unassigned) t.fail(r, "missing label");
    }
    return p;
}

std::string communities_json(const CommunityDetection& d) {
    json doc;
    doc["communities"] = d.partition.community_count();
    doc["sizes"] = d.partition.community_sizes();
    doc["modularity"] = d.partition.modularity;
    doc["pass_modularity"] = d.partition.pass_modularity;
    doc["nodes"] = d.partition.ids.size();
    doc["dropped_nodes"] = d.dropped_nodes;
    doc["component_sizes"] = d.component_sizes;
    return dump(doc);
}

std::string partition_json(const Partition& p, std::size_t seeds) {
    std::size_t unassigned = 0;
    for (int l : p.labels) unassigned += l < 0 ? 1 : 0;
    json doc;
    doc["communities"] = p.community_count();
    doc["sizes"] = p.community_sizes();
    doc["nodes"] = p.ids.size();
    doc["seeds"] = seeds;
    doc["unassigned"] = unassigned;
    doc["sweeps"] = p.sweeps;
    doc["converged"] = p.converged;
    return dump(doc);
}

std::string urls_csv(const UrlClassification& urls) {
    CsvWriter w({"url", "domain", "tag", "orientation"});
    for (const auto& u : urls.urls) {
        w.add({u.url, u.domain.value_or(""), to_string(u.tag), to_string(u.orientation)});
    }
    return w.str();
}

std::vector<UrlInfo> parse_urls_csv(const CsvTable& t) {
    const auto url = t.require("url");
    const auto domain = t.require("domain");
    const auto tag = t.require("tag");
    const auto orientation = t.require("orientation");
    std::vector<UrlInfo> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        UrlInfo u;
        u.url = t.row(r)[url];
        if (!t.row(r)[domain].empty()) u.domain = t.row(r)[domain];
        try {
            u.tag = parse_tag(t.row(r)[tag]);
        } catch (const InputError& e) {
            t.fail(r, e.what());
        }
        u.orientation = parse_orientation(t.row(r)[orientation]);
        out.push_back(std::move(u));
    }
    return out;
}

std::string users_csv(const UserClassification& users) {
    CsvWriter w({"user_id", "community", "score", "bot_class"});
    for (const auto& u : users.users) {
        w.add({u.user_id, u.community ? std::to_string(*u.community) : "", u.score ? format_double(*u.score) : "",
               to_string(u.bot)});
    }
    return w.str();
}

std::vector<UserRecord> parse_users_csv(const CsvTable& t) {
    const auto user = t.require("user_id");
    const auto community = t.require("community");
    const auto score = t.require("score");
    const auto bot = t.require("bot_class");
    std::vector<UserRecord> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        UserRecord u;
        u.user_id = t.row(r)[user];
        if (!trim(t.row(r)[community]).empty()) u.community = static_cast<int>(t.integer(r, community));
        if (!trim(t.row(r)[score]).empty()) u.score = t.real(r, score);
        try {
            u.bot = parse_bot_class(t.row(r)[bot]);
        } catch (const InputError& e) {
            t.fail(r, e.what());
        }
        out.push_back(std::move(u));
    }
    return out;
}

std::string classify_json(const UrlClassification& urls, const UserClassification& users, std::size_t labels,
                          bool has_orientation) {
    json doc;
    doc["distinct_urls"] = urls.urls.size();
    doc["unparseable_urls"] = urls.unparseable;
    std::map<std::string, std::size_t> tags;
    for (auto tag : kAllTags) tags[to_string(tag)] = 0;
    for (const auto& u : urls.urls) ++tags[to_string(u.tag)];
    json tag_counts;
    for (auto tag : kAllTags) tag_counts[to_string(tag)] = tags[to_string(tag)];
    doc["url_tags"] = tag_counts;
    doc["domain_labels"] = labels;
    doc["has_orientation"] = has_orientation;
    doc["users"] = users.users.size();
    doc["validated_users"] = users.validated_users;
    doc["scored_validated_users"] = users.scored_users;
    if (users.deciles) {
        const auto& d = *users.deciles;
        doc["deciles"] = {{"humans", d.humans},
                          {"bots", d.bots},
                          {"human_max_score", d.human_max ? json(*d.human_max) : json(nullptr)},
                          {"bot_min_score", d.bot_min ? json(*d.bot_min) : json(nullptr)}};
    } else {
        doc["deciles"] = nullptr;
    }
    doc["notices"] = users.notices;
    return dump(doc);
}

namespace {

json test_json(const TestResult& r) {
    json doc;
    doc["statistic"] = r.statistic;
    doc["p_value"] = r.p_value;
    doc["effect"] = r.effect ? json(*r.effect) : json(nullptr);
    doc["effect_reverse"] = r.effect ? json(1.0 - *r.effect) : json(nullptr);
    doc["n_a"] = r.n_a;
    doc["n_b"] = r.n_b;
    doc["method"] = to_string(r.method);
    return doc;
}

}  // namespace

std::string test_result_json(const TestResult& result) { return dump(test_json(result)); }

std::string report_tests_json(const ReportTests& tests) {
    json doc;
    json arr = json::array();
    for (const auto& t : tests.tests) {
        json row;
        row["test"] = t.test;
        row["sample_a"] = t.sample_a;
        row["sample_b"] = t.sample_b;
        row["scope"] = t.scope;
        const json fields = test_json(t.result);
        for (const auto& [k, v] : fields.items()) row[k] = v;
        arr.push_back(row);
    }
    doc["tests"] = arr;
    doc["notices"] = tests.notices;
    return dump(doc);
}

// ---------------------------------------------------------------------------
// Report tables are built once as flat rows and rendered to both JSON and CSV.

namespace {

struct FlatTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<json> rows;
};

json percent(const Percent& p) { return p ? json(*p) : json(nullptr); }

std::string cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    return format_double(v.get<double>());
}

std::vector<FlatTable> flatten(const ReportTables& r) {
    std::vector<FlatTable> tables;

    FlatTable states{"states", {"state", "kind", "tweets", "urls"}, {}};
    for (const auto& row : r.states) {
        states.rows.push_back({{"state", row.state}, {"kind", to_string(row.kind)}, {"tweets", row.tweets}, {"urls", row.urls}});
    }
    tables.push_back(std::move(states));

    FlatTable communities{"communities",
                          {"group", "users", "tweets", "safe_pct", "swing_pct", "urls", "left_pct", "right_pct"},
                          {}};
    for (const auto& row : r.communities) {
        communities.rows.push_back({{"group", row.group},
                                    {"users", row.users},
                                    {"tweets", row.tweets},
                                    {"safe_pct", percent(row.safe_pct)},
                                    {"swing_pct", percent(row.swing_pct)},
                                    {"urls", row.urls},
                                    {"left_pct", percent(row.left_pct)},
                                    {"right_pct", percent(row.right_pct)}});
    }
    tables.push_back(std::move(communities));

    FlatTable reliability{"reliability", {"group", "kind", "users", "tweets", "urls"}, {}};
    for (auto tag : kAllTags) reliability.columns.push_back("n_" + to_string(tag));
    for (auto tag : kAllTags) reliability.columns.push_back("pct_" + to_string(tag));
    for (const auto& row : r.reliability) {
        json obj = {{"group", row.group}, {"kind", row.kind}, {"users", row.users}, {"tweets", row.tweets}, {"urls", row.urls}};
        for (std::size_t t = 0; t < kTagCount; ++t) obj["n_" + to_string(kAllTags[t])] = row.counts[t];
        for (std::size_t t = 0; t < kTagCount; ++t) obj["pct_" + to_string(kAllTags[t])] = percent(row.pct[t]);
        reliability.rows.push_back(std::move(obj));
    }
    tables.push_back(std::move(reliability));

    FlatTable accounts{"bot_accounts", {"group", "class", "users", "tweets", "urls"}, {}};
    for (const auto& row : r.bot_accounts) {
        accounts.rows.push_back({{"group", row.group},
                                 {"class", to_string(row.bot)},
                                 {"users", row.users},
                                 {"tweets", row.tweets},
                                 {"urls", row.urls}});
    }
    tables.push_back(std::move(accounts));

    FlatTable traffic{"bot_traffic",
                      {"links", "group", "urls", "swing_pct", "safe_pct", "bot_pct", "human_pct", "swing_bot_pct",
                       "swing_human_pct", "safe_bot_pct", "safe_human_pct"},
                      {}};
    for (const auto& row : r.bot_traffic) {
        traffic.rows.push_back({{"links", row.link_class},
                                {"group", row.group},
                                {"urls", row.urls},
                                {"swing_pct", percent(row.swing_pct)},
                                {"safe_pct", percent(row.safe_pct)},
                                {"bot_pct", percent(row.bot_pct)},
                                {"human_pct", percent(row.human_pct)},
                                {"swing_bot_pct", percent(row.swing_bot_pct)},
                                {"swing_human_pct", percent(row.swing_human_pct)},
                                {"safe_bot_pct", percent(row.safe_bot_pct)},
                                {"safe_human_pct", percent(row.safe_human_pct)}});
    }
    tables.push_back(std::move(traffic));

    FlatTable virality{"virality", {"group", "kind", "tag", "distinct_urls", "shares", "mean", "median"}, {}};
    for (const auto& row : r.virality) {
        virality.rows.push_back({{"group", row.group},
                                 {"kind", row.kind},
                                 {"tag", row.tag},
                                 {"distinct_urls", row.distinct_urls},
                                 {"shares", row.shares},
                                 {"mean", row.mean ? json(*row.mean) : json(nullptr)},
                                 {"median", row.median ? json(*row.median) : json(nullptr)}});
    }
    tables.push_back(std::move(virality));

    FlatTable shares{"url_shares", {"group", "kind", "url", "tag", "shares"}, {}};
    for (const auto& row : r.url_shares) {
        shares.rows.push_back(
            {{"group", row.group}, {"kind", row.kind}, {"url", row.url}, {"tag", to_string(row.tag)}, {"shares", row.shares}});
    }
    tables.push_back(std::move(shares));
    return tables;
}

}  // namespace

std::string report_json(const ReportTables& r) {
    json doc;
    doc["schema_version"] = 1;
    if (r.ingest) {
        doc["ingest"] = {{"input", r.ingest->input},
                         {"excluded_language", r.ingest->excluded_language},
                         {"excluded_multi", r.ingest->excluded_multi},
                         {"excluded_none", r.ingest->excluded_none},
                         {"kept", r.ingest->kept}};
    } else {
        doc["ingest"] = nullptr;
    }
    doc["groups"] = r.groups;
    doc["has_orientation"] = r.has_orientation;
    doc["has_bots"] = r.has_bots;
    doc["notices"] = r.notices;
    json tables;
    for (auto& t : flatten(r)) {
        json arr = json::array();
        for (auto& row : t.rows) {
            json ordered;
            for (const auto& c : t.columns) ordered[c] = row.at(c);
            arr.push_back(std::move(ordered));
        }
        tables[t.name] = std::move(arr);
    }
    doc["tables"] = std::move(tables);
    return dump(doc);
}

std::map<std::string, std::string> report_csv_tables(const ReportTables& r) {
    std::map<std::string, std::string> out;
    for (const auto& t : flatten(r)) {
        CsvWriter w(t.columns);
        for (const auto& row : t.rows) {
            std::vector<std::string> cells;
            for (const auto& c : t.columns) cells.push_back(cell(row.at(c)));
            w.add(cells);
        }
        out["table_" + t.name + ".csv"] = w.str();
    }
    return out;
}

}  // namespace debatenet::io
