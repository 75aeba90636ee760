#include "debatenet/pipeline.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "debatenet/error.hpp"

namespace debatenet {

namespace {

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

std::vector<std::string> resolve_urls(const std::vector<std::string>& urls,
                                      const std::map<std::string, std::string>& url_map) {
    std::vector<std::string> out;
    for (const auto& raw : urls) {
        auto it = url_map.find(raw);
        const std::string& url = it == url_map.end() ? raw : it->second;
        if (url.empty()) continue;
        if (std::find(out.begin(), out.end(), url) == out.end()) out.push_back(url);
    }
    return out;
}

}  // namespace

IngestResult ingest_tweets(std::vector<TweetRecord> records, const StateMatcher& states,
                           const std::map<std::string, std::string>& url_map, const IngestOptions& options) {
    IngestResult out;
    out.language_first = options.language_first;
    out.counts.input = records.size();
    const std::string lang = lower_ascii(options.lang);

    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.tweet_id).second) throw InputError("duplicate tweet id '" + r.tweet_id + "'");
    }

    std::map<std::pair<std::string, std::string>, InteractionRecord> interactions;
    for (auto& r : records) {
        const bool lang_ok = lower_ascii(r.lang) == lang;
        if (options.language_first && !lang_ok) {
            ++out.counts.excluded_language;
            continue;
        }
        const auto match = states.assign(r.text);
        if (match.status == StateAssignment::Status::excluded_multi) {
            ++out.counts.excluded_multi;
            continue;
        }
        if (match.status == StateAssignment::Status::excluded_none) {
            ++out.counts.excluded_none;
            continue;
        }
        if (!lang_ok) {
            ++out.counts.excluded_language;
            continue;
        }
        ++out.counts.kept;
        if (r.retweeted_author_id && !r.retweeted_author_id->empty()) {
            auto [it, inserted] = interactions.try_emplace({r.author_id, *r.retweeted_author_id});
            auto& rec = it->second;
            if (inserted) {
                rec.retweeter = r.author_id;
                rec.author = *r.retweeted_author_id;
                rec.count = 0;
                rec.retweeter_verified = false;
            }
            rec.count += 1;
            rec.author_verified = rec.author_verified || r.retweeted_author_verified.value_or(false);
            rec.retweeter_verified = *rec.retweeter_verified || r.author_verified;
        }
        out.tweets.push_back({std::move(r.tweet_id), std::move(r.author_id), match.state, resolve_urls(r.urls, url_map)});
    }
    out.interactions.reserve(interactions.size());
    for (auto& [key, rec] : interactions) out.interactions.push_back(std::move(rec));
    return out;
}

UrlClassification classify_urls(std::span<const ProcessedTweet> tweets, const DomainTable& labels,
                                const PublicSuffixList& psl) {
    std::set<std::string> distinct;
    for (const auto& t : tweets) distinct.insert(t.urls.begin(), t.urls.end());
    UrlClassification out;
    out.urls.reserve(distinct.size());
    for (const auto& url : distinct) {
        UrlInfo info;
        info.url = url;
        info.domain = registrable_domain(url, psl);
        if (info.domain) {
            info.tag = labels.classify(*info.domain);
            info.orientation = labels.orientation(*info.domain);
        } else {
            ++out.unparseable;
        }
        out.urls.push_back(std::move(info));
    }
    return out;
}

UserClassification classify_users(std::span<const ProcessedTweet> tweets, const std::map<std::string, int>& communities,
                                  std::span<const BotScoreRecord> scores) {
    std::map<std::string, double> score_of;
    for (const auto& r : scores) {
        if (!(r.score >= 0.0 && r.score <= 1.0)) {
            throw InputError("bot score for '" + r.user_id + "' is outside [0, 1]");
        }
        auto [it, inserted] = score_of.emplace(r.user_id, r.score);
        if (!inserted && it->second != r.score) {
            throw InputError("user '" + r.user_id + "' has conflicting bot scores");
        }
    }
    std::set<std::string> authors;
    for (const auto& t : tweets) authors.insert(t.author_id);
    for (const auto& [user, label] : communities) authors.insert(user);

    UserClassification out;
    std::vector<BotScoreRecord> eligible;
    for (const auto& user : authors) {
        UserRecord rec;
        rec.user_id = user;
        if (auto it = communities.find(user); it != communities.end()) rec.community = it->second;
        if (auto it = score_of.find(user); it != score_of.end()) rec.score = it->second;
        if (rec.community) {
            ++out.validated_users;
            if (rec.score) eligible.push_back({user, *rec.score});
        }
        out.users.push_back(std::move(rec));
    }
    out.scored_users = eligible.size();
    if (eligible.size() < 10) {
        out.notices.push_back("bot deciles need at least 10 scored users in communities, found " +
                              std::to_string(eligible.size()) + "; bot tables omitted");
        return out;
    }
    out.deciles = decile_bot_classification(eligible);
    for (auto& rec : out.users) {
        if (auto it = out.deciles->classes.find(rec.user_id); it != out.deciles->classes.end()) rec.bot = it->second;
    }
    for (const auto& w : out.deciles->warnings) out.notices.push_back(w);
    return out;
}

// ---------------------------------------------------------------------------

std::string community_group(int label) { return "community_" + std::to_string(label); }

namespace {

constexpr std::size_t kKinds = 3;  // swing, safe, all
const char* const kKindNames[kKinds] = {"swing", "safe", "all"};

std::size_t kind_slot(StateKind kind) { return kind == StateKind::swing ? 0 : 1; }

std::size_t tag_slot(ReliabilityTag tag) { return static_cast<std::size_t>(tag); }

Percent pct(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

struct ClassTally {
    std::unordered_set<std::size_t> users;
    std::size_t tweets = 0;
    std::size_t urls = 0;
    std::array<std::size_t, kTagCount> tag_urls{};
};

struct Stratum {
    std::unordered_set<std::size_t> users;
    std::size_t tweets = 0;
    std::size_t urls = 0;
    std::array<std::size_t, kTagCount> tags{};
    std::size_t left = 0;
    std::size_t right = 0;
    std::map<std::size_t, std::size_t> shares;  // url index -> shares
    ClassTally human;
    ClassTally bot;
};

// Link classes of the bot traffic table: all URLs, T only, N only.
std::size_t class_urls(const ClassTally& t, std::size_t link_class) {
    if (link_class == 0) return t.urls;
    return t.tag_urls[tag_slot(link_class == 1 ? ReliabilityTag::T : ReliabilityTag::N)];
}

std::optional<double> median_of(std::vector<std::size_t> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return static_cast<double>(values[n / 2]);
    return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

struct Layout {
    std::vector<std::string> names;
    std::vector<int> labels;       // community labels in group order after "validated"
    std::size_t validated = 0;
    std::size_t unassigned = 0;
    std::size_t dataset = 0;
    std::map<int, std::size_t> by_label;
};

Layout make_layout(const std::map<std::string, int>& communities) {
    std::set<int> labels;
    for (const auto& [user, label] : communities) labels.insert(label);
    Layout g;
    g.validated = 0;
    g.names.push_back(kValidatedGroup);
    for (int label : labels) {
        g.by_label[label] = g.names.size();
        g.labels.push_back(label);
        g.names.push_back(community_group(label));
    }
    g.unassigned = g.names.size();
    g.names.push_back(kUnassignedGroup);
    g.dataset = g.names.size();
    g.names.push_back(kDatasetGroup);
    return g;
}

struct Indexed {
    std::unordered_map<std::string, std::size_t> author_index;
    std::vector<BotClass> author_class;
    std::vector<std::optional<double>> author_score;
    std::unordered_map<std::string, std::size_t> url_index;
    std::vector<const UrlInfo*> url_info;
};

Indexed index_inputs(const ReportInputs& in) {
    Indexed ix;
    for (const auto& u : in.users) {
        ix.author_index.emplace(u.user_id, ix.author_class.size());
        ix.author_class.push_back(u.bot);
        ix.author_score.push_back(u.score);
    }
    for (const auto& t : in.tweets) {
        if (ix.author_index.emplace(t.author_id, ix.author_class.size()).second) {
            ix.author_class.push_back(BotClass::unclassified);
            ix.author_score.push_back(std::nullopt);
        }
    }
    for (const auto& u : in.urls) {
        ix.url_index.emplace(u.url, ix.url_info.size());
        ix.url_info.push_back(&u);
    }
    return ix;
}

std::vector<std::size_t> groups_of(const ProcessedTweet& t, const ReportInputs& in, const Layout& layout) {
    auto it = in.communities.find(t.author_id);
    if (it == in.communities.end()) return {layout.unassigned, layout.dataset};
    return {layout.validated, layout.by_label.at(it->second), layout.dataset};
}

}  // namespace

ReportTables aggregate_reports(const ReportInputs& in) {
    ReportTables out;
    out.ingest = in.ingest;
    out.has_orientation = in.has_orientation;
    out.has_bots = in.has_bots;
    const Layout layout = make_layout(in.communities);
    out.groups = layout.names;
    Indexed ix = index_inputs(in);

    static const UrlInfo unknown_url{};
    auto info_of = [&](const std::string& url) -> const UrlInfo& {
        auto it = ix.url_index.find(url);
        return it == ix.url_index.end() ? unknown_url : *ix.url_info[it->second];
    };
    // URLs missing from the classification still need a stable index for share counts.
    for (const auto& t : in.tweets) {
        for (const auto& url : t.urls) {
            if (!ix.url_index.count(url)) {
                ix.url_index.emplace(url, ix.url_info.size());
                ix.url_info.push_back(&unknown_url);
            }
        }
    }
    std::vector<std::string> url_names(ix.url_info.size());
    for (const auto& [url, idx] : ix.url_index) url_names[idx] = url;

    std::vector<StateRow> state_rows(in.states.size());
    for (std::size_t s = 0; s < in.states.size(); ++s) state_rows[s] = {in.states[s].name, in.states[s].kind, 0, 0};

    std::vector<std::array<Stratum, kKinds>> strata(layout.names.size());
    for (const auto& t : in.tweets) {
        if (t.state >= in.states.size()) throw InputError("tweet '" + t.tweet_id + "' references an unknown state");
        ++state_rows[t.state].tweets;
        state_rows[t.state].urls += t.urls.size();
        const std::size_t author = ix.author_index.at(t.author_id);
        const BotClass cls = ix.author_class[author];
        const std::size_t kinds[2] = {kind_slot(in.states[t.state].kind), 2};
        for (std::size_t g : groups_of(t, in, layout)) {
            for (std::size_t k : kinds) {
                Stratum& st = strata[g][k];
                st.users.insert(author);
                ++st.tweets;
                st.urls += t.urls.size();
                ClassTally* tally = cls == BotClass::human ? &st.human : cls == BotClass::bot ? &st.bot : nullptr;
                if (tally) {
                    tally->users.insert(author);
                    ++tally->tweets;
                    tally->urls += t.urls.size();
                }
                for (const auto& url : t.urls) {
                    const UrlInfo& info = info_of(url);
                    ++st.tags[tag_slot(info.tag)];
                    if (info.orientation == Orientation::left) ++st.left;
                    if (info.orientation == Orientation::right) ++st.right;
                    ++st.shares[ix.url_index.at(url)];
                    if (tally) ++tally->tag_urls[tag_slot(info.tag)];
                }
            }
        }
    }
    out.states = std::move(state_rows);

    for (std::size_t g = 0; g < layout.names.size(); ++g) {
        const auto& all = strata[g][2];
        CommunityRow row;
        row.group = layout.names[g];
        row.users = all.users.size();
        row.tweets = all.tweets;
        row.safe_pct = pct(strata[g][1].tweets, all.tweets);
        row.swing_pct = pct(strata[g][0].tweets, all.tweets);
        row.urls = all.urls;
        if (in.has_orientation) {
            row.left_pct = pct(all.left, all.urls);
            row.right_pct = pct(all.right, all.urls);
        }
        out.communities.push_back(std::move(row));
    }
    if (!in.has_orientation) {
        out.notices.push_back("domain labels carry no orientation; left/right columns omitted");
    }

    for (std::size_t g = 0; g < layout.names.size(); ++g) {
        for (std::size_t k = 0; k < kKinds; ++k) {
            const auto& st = strata[g][k];
            ReliabilityRow row;
            row.group = layout.names[g];
            row.kind = kKindNames[k];
            row.users = st.users.size();
            row.tweets = st.tweets;
            row.urls = st.urls;
            row.counts = st.tags;
            for (std::size_t tag = 0; tag < kTagCount; ++tag) row.pct[tag] = pct(st.tags[tag], st.urls);
            out.reliability.push_back(std::move(row));
        }
    }

    // Bot tables cover the validated set and its communities.
    const std::size_t bot_groups = layout.unassigned;
    if (in.has_bots) {
        for (std::size_t g = 0; g < bot_groups; ++g) {
            for (BotClass cls : {BotClass::human, BotClass::bot}) {
                const ClassTally& t = cls == BotClass::human ? strata[g][2].human : strata[g][2].bot;
                out.bot_accounts.push_back({layout.names[g], cls, t.users.size(), t.tweets, t.urls});
            }
        }
        const char* const link_names[3] = {"all", "T", "N"};
        for (std::size_t lc = 0; lc < 3; ++lc) {
            for (std::size_t g = 0; g < bot_groups; ++g) {
                auto classified = [&](std::size_t k) {
                    return class_urls(strata[g][k].human, lc) + class_urls(strata[g][k].bot, lc);
                };
                BotTrafficRow row;
                row.link_class = link_names[lc];
                row.group = layout.names[g];
                row.urls = classified(2);
                row.swing_pct = pct(classified(0), row.urls);
                row.safe_pct = pct(classified(1), row.urls);
                row.bot_pct = pct(class_urls(strata[g][2].bot, lc), row.urls);
                row.human_pct = pct(class_urls(strata[g][2].human, lc), row.urls);
                row.swing_bot_pct = pct(class_urls(strata[g][0].bot, lc), classified(0));
                row.swing_human_pct = pct(class_urls(strata[g][0].human, lc), classified(0));
                row.safe_bot_pct = pct(class_urls(strata[g][1].bot, lc), classified(1));
                row.safe_human_pct = pct(class_urls(strata[g][1].human, lc), classified(1));
                out.bot_traffic.push_back(std::move(row));
            }
        }
    } else {
        out.notices.push_back("no bot classification available; bot tables omitted");
    }

    for (std::size_t g = 0; g < layout.names.size(); ++g) {
        for (std::size_t k = 0; k < kKinds; ++k) {
            const auto& shares = strata[g][k].shares;
            for (std::size_t tag = 0; tag <= kTagCount; ++tag) {
                // Slot kTagCount stands for every tag together.
                std::vector<std::size_t> values;
                for (const auto& [url, n] : shares) {
                    if (tag == kTagCount || tag_slot(ix.url_info[url]->tag) == tag) values.push_back(n);
                }
                ViralityRow row;
                row.group = layout.names[g];
                row.kind = kKindNames[k];
                row.tag = tag == kTagCount ? "all" : to_string(kAllTags[tag]);
                row.distinct_urls = values.size();
                for (auto v : values) row.shares += v;
                if (!values.empty()) {
                    row.mean = static_cast<double>(row.shares) / static_cast<double>(values.size());
                }
                row.median = median_of(std::move(values));
                out.virality.push_back(std::move(row));
            }
        }
    }

    for (std::size_t g = 0; g < bot_groups; ++g) {
        for (std::size_t k = 0; k < kKinds; ++k) {
            std::vector<UrlShareRow> rows;
            for (const auto& [url, n] : strata[g][k].shares) {
                rows.push_back({layout.names[g], kKindNames[k], url_names[url], ix.url_info[url]->tag, n});
            }
            std::sort(rows.begin(), rows.end(), [](const UrlShareRow& a, const UrlShareRow& b) { return a.url < b.url; });
            out.url_shares.insert(out.url_shares.end(), rows.begin(), rows.end());
        }
    }
    return out;
}

ReportTests run_report_tests(const ReportInputs& in) {
    ReportTests out;
    const Layout layout = make_layout(in.communities);
    const Indexed ix = index_inputs(in);
    std::unordered_map<std::string, ReliabilityTag> tag_of;
    for (const auto& u : in.urls) tag_of.emplace(u.url, u.tag);

    // Validated swing/safe x T/N contingency table.
    double table[2][2] = {{0, 0}, {0, 0}};
    for (const auto& t : in.tweets) {
        if (!in.communities.count(t.author_id)) continue;
        const std::size_t row = kind_slot(in.states.at(t.state).kind);
        for (const auto& url : t.urls) {
            auto it = tag_of.find(url);
            if (it == tag_of.end()) continue;
            if (it->second == ReliabilityTag::T) table[row][0] += 1;
            if (it->second == ReliabilityTag::N) table[row][1] += 1;
        }
    }
    try {
        out.tests.push_back({"chi_square", "swing", "safe", "T/N links",
                             chi_square({{table[0][0], table[0][1]}, {table[1][0], table[1][1]}})});
    } catch (const InputError& e) {
        out.notices.push_back(std::string("chi-square skipped: ") + e.what());
    }

    if (layout.labels.size() < 2) {
        out.notices.push_back("bot score tests need two communities; found " + std::to_string(layout.labels.size()));
        return out;
    }
    const int first = layout.labels[0];
    const int second = layout.labels[1];
    for (const char* scope : {"all", "urls"}) {
        std::vector<double> validated, a, b;
        for (const auto& t : in.tweets) {
            if (std::string_view(scope) == "urls" && t.urls.empty()) continue;
            auto it = in.communities.find(t.author_id);
            if (it == in.communities.end()) continue;
            const auto& score = ix.author_score[ix.author_index.at(t.author_id)];
            if (!score) continue;
            validated.push_back(*score);
            if (it->second == first) a.push_back(*score);
            if (it->second == second) b.push_back(*score);
        }
        const std::string va = kValidatedGroup, ca = community_group(first), cb = community_group(second);
        const std::pair<const std::vector<double>*, const std::vector<double>*> pairs[3] = {
            {&validated, &a}, {&validated, &b}, {&b, &a}};
        const std::pair<std::string, std::string> names[3] = {{va, ca}, {va, cb}, {cb, ca}};
        for (std::size_t p = 0; p < 3; ++p) {
            const auto& [x, y] = pairs[p];
            if (x->empty() || y->empty()) {
                out.notices.push_back("bot score tests " + names[p].first + " vs " + names[p].second + " (" + scope +
                                      ") skipped: empty sample");
                continue;
            }
            out.tests.push_back({"ks", names[p].first, names[p].second, scope, ks_test(*x, *y)});
            out.tests.push_back({"mwu", names[p].first, names[p].second, scope, mann_whitney_u(*x, *y)});
        }
    }
    return out;
}

}  // namespace debatenet
