#include "debatenet/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "debatenet/error.hpp"

namespace debatenet {

namespace detail {
std::string_view builtin_public_suffix_list();
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

bool is_word_byte(unsigned char ch) { return std::isalnum(ch) || ch >= 0x80; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string to_string(StateKind kind) { return kind == StateKind::swing ? "swing" : "safe"; }

StateKind parse_state_kind(std::string_view name) {
    const std::string n = lower(trim(name));
    if (n == "swing") return StateKind::swing;
    if (n == "safe") return StateKind::safe;
    throw InputError("unknown state kind '" + std::string(name) + "' (expected swing or safe)");
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto ch = static_cast<unsigned char>(c);
        if (is_word_byte(ch)) {
            current.push_back(static_cast<char>(std::tolower(ch)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

StateMatcher::StateMatcher(std::vector<StateSpec> states) : states_(std::move(states)) {
    if (states_.empty()) throw InputError("state list is empty");
    std::set<std::vector<std::string>> seen;
    for (const auto& s : states_) {
        auto phrase = tokenize(s.name);
        if (phrase.empty()) throw InputError("state name '" + s.name + "' has no letters");
        if (!seen.insert(phrase).second) throw InputError("duplicate state name '" + s.name + "'");
        longest_ = std::max(longest_, phrase.size());
        phrases_.push_back(std::move(phrase));
    }
}

StateAssignment StateMatcher::assign(std::string_view text) const {
    const auto tokens = tokenize(text);
    std::set<std::size_t> found;
    std::size_t pos = 0;
    while (pos < tokens.size()) {
        std::size_t best_len = 0;
        std::size_t best_state = 0;
        for (std::size_t s = 0; s < phrases_.size(); ++s) {
            const auto& phrase = phrases_[s];
            if (phrase.size() <= best_len || pos + phrase.size() > tokens.size()) continue;
            if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos))) {
                best_len = phrase.size();
                best_state = s;
            }
        }
        if (best_len > 0) {
            found.insert(best_state);
            pos += best_len;
        } else {
            ++pos;
        }
    }
    StateAssignment out;
    if (found.empty()) {
        out.status = StateAssignment::Status::excluded_none;
    } else if (found.size() > 1) {
        out.status = StateAssignment::Status::excluded_multi;
    } else {
        out.status = StateAssignment::Status::matched;
        out.state = *found.begin();
    }
    return out;
}

StateAssignment assign_state(std::string_view text, const std::vector<StateSpec>& states) {
    return StateMatcher(states).assign(text);
}

LanguageFiltered filter_language(std::vector<TweetRecord> records, std::string_view lang) {
    const std::string wanted = lower(lang);
    LanguageFiltered out;
    out.kept.reserve(records.size());
    for (auto& r : records) {
        if (lower(r.lang) == wanted) {
            out.kept.push_back(std::move(r));
        } else {
            ++out.removed;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
    PublicSuffixList psl;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        // A rule ends at the first whitespace.
        if (auto ws = line.find_first_of(" \t"); ws != std::string_view::npos) line = line.substr(0, ws);
        if (line.empty() || line.starts_with("//")) continue;
        const std::string rule = lower(line);
        if (rule.starts_with("!")) {
            psl.exceptions_.insert(rule.substr(1));
        } else if (rule.starts_with("*.")) {
            psl.wildcards_.insert(rule.substr(2));
        } else {
            psl.rules_.insert(rule);
        }
    }
    return psl;
}

const PublicSuffixList& PublicSuffixList::builtin() {
    static const PublicSuffixList list = parse(detail::builtin_public_suffix_list());
    return list;
}

std::optional<std::string> PublicSuffixList::registrable_domain_of_host(std::string_view host_view) const {
    const std::string host = lower(host_view);
    std::vector<std::string_view> labels;
    std::string_view rest(host);
    while (true) {
        const auto dot = rest.find('.');
        labels.push_back(rest.substr(0, dot));
        if (dot == std::string_view::npos) break;
        rest.remove_prefix(dot + 1);
    }
    for (auto label : labels) {
        if (label.empty()) return std::nullopt;
    }
    auto join_from = [&](std::size_t i) {
        std::string s;
        for (std::size_t k = i; k < labels.size(); ++k) {
            if (k > i) s.push_back('.');
            s.append(labels[k]);
        }
        return s;
    };
    // The suffix starts at label index `suffix`; the longest matching rule wins and an
    // exception rule beats the wildcard that would otherwise cover it.
    std::size_t suffix = labels.size() - 1;  // implicit "*" rule
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::string candidate = join_from(i);
        if (exceptions_.count(candidate)) {
            suffix = i + 1;
            break;
        }
        if (rules_.count(candidate)) {
            suffix = i;
            break;
        }
        if (i + 1 < labels.size() && wildcards_.count(join_from(i + 1))) {
            suffix = i;
            break;
        }
    }
    if (suffix == 0) return std::nullopt;
    return join_from(suffix - 1);
}

std::optional<std::string> url_host(std::string_view url) {
    std::string_view s = trim(url);
    if (s.empty()) return std::nullopt;
    if (auto scheme_end = s.find("://"); scheme_end != std::string_view::npos) {
        const auto scheme = s.substr(0, scheme_end);
        if (scheme.empty() || !std::isalpha(static_cast<unsigned char>(scheme.front()))) return std::nullopt;
        for (char c : scheme) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.')) return std::nullopt;
        }
        s.remove_prefix(scheme_end + 3);
    } else if (s.starts_with("//")) {
        s.remove_prefix(2);
    }
    s = s.substr(0, s.find_first_of("/?#"));
    if (auto at = s.rfind('@'); at != std::string_view::npos) s.remove_prefix(at + 1);
    if (s.starts_with("[")) return std::nullopt;  // IPv6 literal
    if (auto colon = s.find(':'); colon != std::string_view::npos) s = s.substr(0, colon);
    if (s.ends_with(".")) s.remove_suffix(1);
    if (s.empty() || s.find('.') == std::string_view::npos) return std::nullopt;
    bool all_numeric = true;
    for (char c : s) {
        const auto ch = static_cast<unsigned char>(c);
        if (!(std::isalnum(ch) || ch == '-' || ch == '.' || ch == '_' || ch >= 0x80)) return std::nullopt;
        if (std::isalpha(ch) || ch >= 0x80) all_numeric = false;
    }
    if (all_numeric) return std::nullopt;  // IPv4 address
    return lower(s);
}

std::optional<std::string> registrable_domain(std::string_view url, const PublicSuffixList& psl) {
    const auto host = url_host(url);
    if (!host) return std::nullopt;
    return psl.registrable_domain_of_host(*host);
}

// ---------------------------------------------------------------------------

std::string to_string(ReliabilityTag tag) {
    switch (tag) {
        case ReliabilityTag::T: return "T";
        case ReliabilityTag::N: return "N";
        case ReliabilityTag::P: return "P";
        case ReliabilityTag::S: return "S";
        case ReliabilityTag::UNC: return "UNC";
    }
    return "UNC";
}

ReliabilityTag parse_tag(std::string_view name) {
    std::string n(trim(name));
    for (auto& ch : n) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    for (auto tag : kAllTags) {
        if (to_string(tag) == n) return tag;
    }
    throw InputError("unknown reliability tag '" + std::string(name) + "' (expected T, N, P, S or UNC)");
}

std::string to_string(Orientation o) {
    switch (o) {
        case Orientation::left: return "left";
        case Orientation::right: return "right";
        case Orientation::none: return "";
    }
    return "";
}

Orientation parse_orientation(std::string_view text) {
    const std::string t = lower(text);
    const bool left = t.find("left") != std::string::npos;
    const bool right = t.find("right") != std::string::npos;
    if (left && !right) return Orientation::left;
    if (right && !left) return Orientation::right;
    return Orientation::none;
}

DomainTable::DomainTable(std::vector<DomainLabel> labels) {
    for (auto& label : labels) {
        label.domain = lower(trim(label.domain));
        if (label.orientation && trim(*label.orientation).empty()) label.orientation.reset();
        if (label.orientation) has_orientation_ = true;
        auto [it, inserted] = labels_.emplace(label.domain, label);
        if (!inserted && (it->second.tag != label.tag || it->second.orientation != label.orientation)) {
            throw InputError("conflicting labels for domain '" + label.domain + "'");
        }
    }
}

ReliabilityTag DomainTable::classify(std::string_view domain) const {
    auto it = labels_.find(lower(domain));
    return it == labels_.end() ? ReliabilityTag::UNC : it->second.tag;
}

Orientation DomainTable::orientation(std::string_view domain) const {
    auto it = labels_.find(lower(domain));
    if (it == labels_.end() || !it->second.orientation) return Orientation::none;
    return parse_orientation(*it->second.orientation);
}

// ---------------------------------------------------------------------------

std::string to_string(BotClass c) {
    switch (c) {
        case BotClass::human: return "human";
        case BotClass::bot: return "bot";
        case BotClass::unclassified: return "unclassified";
    }
    return "unclassified";
}

BotClass parse_bot_class(std::string_view name) {
    const std::string n = lower(trim(name));
    if (n == "human") return BotClass::human;
    if (n == "bot") return BotClass::bot;
    if (n == "unclassified" || n.empty()) return BotClass::unclassified;
    throw InputError("unknown bot class '" + std::string(name) + "'");
}

BotClassification decile_bot_classification(std::span<const BotScoreRecord> scores) {
    BotClassification out;
    for (const auto& r : scores) {
        if (!(r.score >= 0.0 && r.score <= 1.0)) {
            throw InputError("bot score for '" + r.user_id + "' is outside [0, 1]");
        }
        auto [it, inserted] = out.scores.emplace(r.user_id, r.score);
        if (!inserted && it->second != r.score) {
            throw InputError("user '" + r.user_id + "' has conflicting bot scores");
        }
    }
    const std::size_t n = out.scores.size();
    if (n < 10) {
        throw InputError("decile classification needs at least 10 distinct users, got " + std::to_string(n));
    }
    std::vector<double> sorted;
    sorted.reserve(n);
    for (const auto& [user, s] : out.scores) sorted.push_back(s);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t decile = n / 10;
    // Strictly below the first inner score, strictly above the last inner score.
    const double low_cut = sorted[decile];
    const double high_cut = sorted[n - decile - 1];
    for (const auto& [user, s] : out.scores) {
        BotClass c = BotClass::unclassified;
        if (s < low_cut) {
            c = BotClass::human;
            ++out.humans;
            out.human_max = std::max(out.human_max.value_or(s), s);
        } else if (s > high_cut) {
            c = BotClass::bot;
            ++out.bots;
            out.bot_min = std::min(out.bot_min.value_or(s), s);
        }
        out.classes.emplace(user, c);
    }
    if (out.humans < decile) {
        out.warnings.push_back("ties at the lower decile boundary left " + std::to_string(decile - out.humans) +
                               " users unclassified");
    }
    if (out.bots < decile) {
        out.warnings.push_back("ties at the upper decile boundary left " + std::to_string(decile - out.bots) +
                               " users unclassified");
    }
    return out;
}

}  // namespace debatenet
