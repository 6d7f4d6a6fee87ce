#include "adxprobe/cli.hpp"

#include "adxprobe/cluster.hpp"
#include "adxprobe/detect.hpp"
#include "adxprobe/error.hpp"
#include "adxprobe/identify.hpp"
#include "adxprobe/live_fetcher.hpp"
#include "adxprobe/metrics.hpp"
#include "adxprobe/records.hpp"
#include "adxprobe/report.hpp"
#include "adxprobe/run.hpp"
#include "adxprobe/sim.hpp"
#include "adxprobe/taxonomy.hpp"
#include "adxprobe/text.hpp"
#include "adxprobe/tfidf.hpp"
#include "adxprobe/url.hpp"
#include "adxprobe/workspace.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace adxprobe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

const fs::path kDataDir = ADXPROBE_DATA_DIR;

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> read_lines(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            out.push_back(line);
    }
    return out;
}

std::string join_lines(const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& l : lines)
        out += l + "\n";
    return out;
}

template <class T>
std::string jsonl(const std::vector<T>& items)
{
    std::ostringstream out;
    write_jsonl<T>(out, items);
    return out.str();
}

struct Options {
    std::string workspace = "workspace";
    std::string ruleset = (kDataDir / "ruleset.jsonl").string();
    std::string taxonomy = (kDataDir / "taxonomy.jsonl").string();
    std::string dict = (kDataDir / "dict.txt").string();
    std::string mode;
    std::string scenario;
    std::uint64_t seed = 1;
    double mean_gap = 180.0;
    int days = 10;
    double day_length = 86400.0;
    double freshness_bound = 30.0;
    bool force = false;

    // stage-specific
    std::string log;
    std::string platforms;
    std::string texts;
    double min_cjk = 0.30;
    int k_min = 2;
    int k_max = 30;
    std::string controls;
    std::vector<std::string> personas;
    std::vector<std::string> switches;
    std::string user_agent = "Mozilla/5.0 (X11; Linux x86_64) Chrome/120.0";
    std::string reader_jar = "reader-0";
    std::size_t threads = 4;
    std::string image_fixtures;
    std::string keyword_fixtures;
    std::string product_rules = (kDataDir / "product_rules.jsonl").string();
    std::string blocklist = (kDataDir / "title_blocklist.txt").string();
    std::string stopwords = (kDataDir / "stopwords.txt").string();
    bool cumulative = false;
};

/// Resolved configuration plus loaded shared resources.
class Context {
public:
    Context(Options opts, const std::set<std::string>& explicit_flags, std::ostream& out)
        : o(std::move(opts)), out_(out), ws(o.workspace)
    {
        if (o.mode.empty())
            o.mode = o.scenario.empty() ? "live" : "sim";
        if (o.mode != "sim" && o.mode != "live")
            throw UsageError("--mode must be 'sim' or 'live'");
        if (o.mode == "sim" && o.scenario.empty())
            throw UsageError("sim mode requires --scenario");
        if (o.mode == "live" && !o.scenario.empty())
            throw UsageError("live mode does not take --scenario");
        ruleset = AdxRuleset::load(o.ruleset);
        taxonomy = Taxonomy::load(o.taxonomy);
        dictionary = Dictionary::load(o.dict);
        taxonomy.extend(dictionary);
        if (sim()) {
            scenario = Scenario::load(o.scenario);
            scenario->validate(ruleset, taxonomy);
            if (!explicit_flags.contains("mean-gap"))
                o.mean_gap = scenario->mean_gap;
            if (!explicit_flags.contains("days"))
                o.days = scenario->days;
            if (!explicit_flags.contains("day-length"))
                o.day_length = scenario->day_length;
            if (!explicit_flags.contains("freshness-bound"))
                o.freshness_bound = scenario->freshness_bound;
            if (!explicit_flags.contains("reader-jar"))
                o.reader_jar = scenario->reader_jar;
        }
        if (o.mean_gap <= 0 || o.days < 1 || o.day_length <= 0 || o.freshness_bound <= 0)
            throw UsageError("--mean-gap, --days, --day-length and --freshness-bound must be positive");
    }

    bool sim() const { return o.mode == "sim"; }

    std::map<std::string, std::string> resource_hashes() const
    {
        std::map<std::string, std::string> h{{"ruleset", sha256_file(o.ruleset)},
                                             {"taxonomy", sha256_file(o.taxonomy)},
                                             {"dict", sha256_file(o.dict)}};
        if (sim())
            h["scenario"] = sha256_file(o.scenario);
        return h;
    }

    json base_params() const
    {
        return {{"mode", o.mode}, {"seed", o.seed}, {"mean_gap", o.mean_gap}, {"days", o.days},
                {"day_length", o.day_length}, {"freshness_bound", o.freshness_bound}};
    }

    std::unique_ptr<SimWorld> make_world() const
    {
        return std::make_unique<SimWorld>(*scenario, ruleset, taxonomy);
    }

    // Returns true when the stage can be skipped.
    bool skip(const StageManifest& m)
    {
        if (!o.force && ws.up_to_date(m)) {
            out_ << m.stage << ": up to date\n";
            return true;
        }
        return false;
    }

    Options o;
    std::ostream& out_;
    Workspace ws;
    AdxRuleset ruleset;
    Taxonomy taxonomy;
    Dictionary dictionary;
    std::optional<Scenario> scenario;
};

// parse: request log -> monitor matrix
void stage_parse(Context& ctx)
{
    StageManifest m;
    m.stage = "parse";
    m.inputs = ctx.resource_hashes();
    std::string log_text;
    if (!ctx.o.log.empty()) {
        m.inputs["log"] = sha256_file(ctx.o.log);
    } else if (ctx.sim()) {
        const auto world = ctx.make_world();
        const auto records = world->crawl_log();
        for (const auto& r : records)
            log_text += to_json_line(r) + "\n";
        m.inputs["log"] = sha256_hex(log_text);
    } else {
        throw UsageError("parse: --log is required in live mode");
    }
    if (ctx.skip(m))
        return;

    ParsedLog parsed;
    if (!ctx.o.log.empty()) {
        parsed = parse_request_log(fs::path(ctx.o.log));
    } else {
        std::istringstream in(log_text);
        parsed = parse_request_log(in);
    }
    const auto matrix = build_monitor_matrix(parsed.records, ctx.ruleset);

    StageWriter w(ctx.ws, "parse");
    if (!log_text.empty())
        w.write("requests.jsonl", log_text);
    std::ostringstream csv, lines, skipped;
    matrix.write_csv(csv);
    matrix.write_jsonl(lines);
    for (const auto& s : parsed.skipped)
        skipped << json{{"line", s.line}, {"reason", s.reason}}.dump() << '\n';
    w.write("matrix.csv", csv.str());
    w.write("matrix.jsonl", lines.str());
    w.write("skipped.jsonl", skipped.str());
    w.commit(m);
    ctx.out_ << "parse: " << parsed.records.size() << " requests, " << parsed.skipped.size() << " skipped, "
             << matrix.pages().size() << " pages x " << matrix.platforms().size() << " platforms\n";
}

std::vector<std::string> default_platforms(const Context& ctx)
{
    std::vector<std::string> out;
    if (ctx.scenario)
        for (const auto& e : ctx.scenario->exchanges)
            out.push_back(e.platform);
    return out;
}

// intersect: matrix + platform list -> page list
void stage_intersect(Context& ctx)
{
    const auto matrix_path = ctx.ws.require("parse", "matrix.csv");
    std::vector<std::string> platforms;
    for (auto& p : split(ctx.o.platforms, ','))
        if (!p.empty())
            platforms.push_back(p);
    if (platforms.empty())
        platforms = default_platforms(ctx);
    if (platforms.empty())
        throw UsageError("intersect: --platforms is required");

    StageManifest m;
    m.stage = "intersect";
    m.inputs = {{"matrix", sha256_file(matrix_path)}};
    m.params = {{"platforms", platforms}};
    if (ctx.skip(m))
        return;

    std::ifstream in(matrix_path);
    const auto matrix = MonitorMatrix::read_csv(in);
    const auto pages = intersect_pages(matrix, {platforms.begin(), platforms.end()});
    StageWriter w(ctx.ws, "intersect");
    w.write("pages.txt", join_lines(pages));
    w.write("platforms.txt", join_lines(platforms));
    w.commit(m);
    std::string names;
    for (const auto& p : platforms)
        names += (names.empty() ? "" : ",") + p;
    ctx.out_ << "intersect: " << pages.size() << " pages monitored by all of " << names << "\n";
}

std::unique_ptr<Fetcher> make_fetcher(const Context& ctx)
{
    if (ctx.sim())
        return ctx.make_world();
    return std::make_unique<LiveFetcher>();
}

// classify: pages -> features, clusters, labels
void stage_classify(Context& ctx)
{
    const auto pages_path = ctx.ws.require("intersect", "pages.txt");
    StageManifest m;
    m.stage = "classify";
    m.inputs = ctx.resource_hashes();
    m.inputs["pages"] = sha256_file(pages_path);
    if (!ctx.o.texts.empty())
        m.inputs["texts"] = sha256_file(ctx.o.texts);
    m.params = {{"seed", ctx.o.seed}, {"min_cjk", ctx.o.min_cjk}, {"k_min", ctx.o.k_min}, {"k_max", ctx.o.k_max}};
    if (ctx.skip(m))
        return;

    const auto urls = read_lines(pages_path);
    std::map<std::string, std::string> html;
    if (!ctx.o.texts.empty()) {
        std::ifstream in(ctx.o.texts);
        if (!in)
            throw InputError("cannot read " + ctx.o.texts);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const auto j = json::parse(line);
            html[normalize_page_url(j.at("url").get<std::string>())] = j.at("html").get<std::string>();
        }
    } else {
        auto fetcher = make_fetcher(ctx);
        const Identity crawler{"adxprobe-crawler/1.0", "crawler-0"};
        for (const auto& url : urls) {
            auto r = fetcher->fetch({url, crawler, 0.0});
            if (r.ok())
                html[url] = r.body;
        }
    }

    std::vector<PageText> texts;
    for (const auto& url : urls)
        if (auto it = html.find(url); it != html.end())
            texts.push_back({url, strip_markup(it->second)});
    const auto kept = filter_language(texts, ctx.o.min_cjk);
    std::set<std::string> kept_urls;
    for (const auto& p : kept)
        kept_urls.insert(p.url);
    std::vector<std::string> dropped;
    for (const auto& url : urls)
        if (!kept_urls.contains(url))
            dropped.push_back(url);

    std::vector<TokenizedDocument> docs;
    for (const auto& p : kept)
        docs.push_back(extract_text(html.at(p.url), ctx.dictionary, p.url));
    const auto corpus = vectorize_corpus(docs);
    const Eigen::MatrixXd points = stack_rows(corpus.vectors);
    const int m_pages = static_cast<int>(points.rows());
    const int k_max = std::min(ctx.o.k_max, m_pages);
    if (k_max < ctx.o.k_min)
        throw InputError("classify: only " + std::to_string(m_pages) + " pages left after the language filter");
    const auto selected = select_k(points, ctx.o.k_min, k_max, ctx.o.seed);
    const auto cluster_labels = label_clusters(selected.clustering, corpus.model.vocabulary, ctx.taxonomy);

    std::vector<PageFeatures> features;
    std::vector<PageLabel> labels;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        features.push_back({docs[i].url, corpus.features[i]});
        const int c = selected.clustering.assignments[i];
        labels.push_back({docs[i].url, c, cluster_labels[static_cast<std::size_t>(c)].category});
    }
    json clusters = json::array();
    for (const auto& l : cluster_labels)
        clusters.push_back({{"cluster", l.cluster}, {"category", l.category}, {"overlap", l.overlap},
                            {"top_terms", l.top_terms}, {"tied", l.tied}});
    std::ostringstream sil;
    sil << "k,silhouette\n";
    for (const auto& [k, s] : selected.scores)
        sil << k << ',' << s << '\n';

    StageWriter w(ctx.ws, "classify");
    w.write("pages.jsonl", jsonl(kept));
    w.write("dropped.txt", join_lines(dropped));
    w.write("features.jsonl", jsonl(features));
    w.write("labels.jsonl", jsonl(labels));
    std::string cl;
    for (const auto& c : clusters)
        cl += c.dump() + "\n";
    w.write("clusters.jsonl", cl);
    w.write("silhouette.csv", sil.str());
    w.commit(m);
    ctx.out_ << "classify: " << docs.size() << " pages, k=" << selected.best_k << " (silhouette "
             << selected.clustering.mean_silhouette << "), " << dropped.size() << " dropped by language\n";
}

// persona: labeled pages -> persona plans
void stage_persona(Context& ctx)
{
    const auto labels_path = ctx.ws.require("classify", "labels.jsonl");
    StageManifest m;
    m.stage = "persona";
    m.inputs = ctx.resource_hashes();
    m.inputs["labels"] = sha256_file(labels_path);
    if (!ctx.o.controls.empty())
        m.inputs["controls"] = sha256_file(ctx.o.controls);
    m.params = {{"personas", ctx.o.personas}, {"switches", ctx.o.switches}, {"user_agent", ctx.o.user_agent}};
    if (ctx.skip(m))
        return;

    std::vector<LabeledPage> labeled;
    for (const auto& l : read_jsonl_file<PageLabel>(labels_path, "page label"))
        labeled.push_back({l.url, l.category});

    std::vector<std::string> controls;
    if (!ctx.o.controls.empty())
        controls = read_lines(ctx.o.controls);
    else if (ctx.sim())
        controls = ctx.make_world()->control_pages();
    else
        throw UsageError("persona: --controls is required in live mode");

    std::vector<ScenarioPersona> wanted;
    if (!ctx.o.personas.empty()) {
        for (const auto& spec : ctx.o.personas) {
            // name:interest[:seed[:user agent]]
            auto parts = split(spec, ':');
            if (parts.size() < 2)
                throw UsageError("--persona expects name:interest[:seed[:user-agent]]");
            ScenarioPersona p;
            p.name = parts[0];
            p.interest = parts[1];
            p.seed = parts.size() > 2 ? std::stoull(parts[2]) : ctx.o.seed;
            p.user_agent = ctx.o.user_agent;
            if (parts.size() > 3) {
                p.user_agent.clear();
                for (std::size_t i = 3; i < parts.size(); ++i)
                    p.user_agent += (i > 3 ? ":" : "") + parts[i];
            }
            wanted.push_back(std::move(p));
        }
        for (const auto& sw : ctx.o.switches) {
            auto parts = split(sw, ':');
            if (parts.size() != 3)
                throw UsageError("--switch expects name:day:interest");
            auto it = std::find_if(wanted.begin(), wanted.end(), [&](const auto& p) { return p.name == parts[0]; });
            if (it == wanted.end())
                throw UsageError("--switch names unknown persona " + parts[0]);
            it->switch_to = PersonaSwitch{std::stoi(parts[1]), parts[2]};
        }
    } else if (ctx.sim()) {
        wanted = ctx.scenario->personas;
    } else {
        throw UsageError("persona: at least one --persona is required in live mode");
    }

    std::vector<PersonaPlan> plans;
    std::vector<std::string> warnings;
    for (const auto& p : wanted) {
        PersonaPlan plan;
        plan.name = p.name;
        plan.seed = p.seed;
        const Identity id{p.user_agent, p.name};
        auto first = make_persona(p.name, p.interest, labeled, controls, id, &ctx.taxonomy);
        warnings.insert(warnings.end(), first.warnings.begin(), first.warnings.end());
        plan.phases.push_back({1, std::move(first.spec)});
        if (p.switch_to) {
            auto second = make_persona(p.name, p.switch_to->interest, labeled, controls, id, &ctx.taxonomy);
            warnings.insert(warnings.end(), second.warnings.begin(), second.warnings.end());
            plan.phases.push_back({p.switch_to->day, std::move(second.spec)});
        }
        plan.validate();
        plans.push_back(std::move(plan));
    }

    StageWriter w(ctx.ws, "persona");
    w.write("personas.jsonl", jsonl(plans));
    w.write("warnings.txt", join_lines(warnings));
    w.commit(m);
    ctx.out_ << "persona: " << plans.size() << " personas\n";
    for (const auto& warning : warnings)
        ctx.out_ << "persona: warning: " << warning << "\n";
}

// run: persona plans -> ad observations
void stage_run(Context& ctx)
{
    const auto personas_path = ctx.ws.require("persona", "personas.jsonl");
    StageManifest m;
    m.stage = "run";
    m.inputs = ctx.resource_hashes();
    m.inputs["personas"] = sha256_file(personas_path);
    m.params = ctx.base_params();
    m.params["reader_jar"] = ctx.o.reader_jar;
    m.params["threads"] = ctx.o.threads;
    if (ctx.skip(m))
        return;

    const auto plans = read_jsonl_file<PersonaPlan>(personas_path, "persona plan");
    RunOptions ro;
    ro.mean_gap = ctx.o.mean_gap;
    ro.horizon_days = ctx.o.days;
    ro.day_length = ctx.o.day_length;
    ro.freshness_bound = ctx.o.freshness_bound;
    ro.reader_threads = ctx.o.threads;
    const Identity reader{"adxprobe-reader/1.0", ctx.o.reader_jar};

    std::unique_ptr<SimWorld> world;
    std::unique_ptr<Fetcher> live;
    Fetcher* base = nullptr;
    std::unique_ptr<Clock> clock;
    DayHook hook;
    if (ctx.sim()) {
        world = ctx.make_world();
        base = world.get();
        clock = std::make_unique<LogicalClock>();
        hook = [&world](int day) { world->advance_to_day(day); };
    } else {
        live = std::make_unique<LiveFetcher>();
        base = live.get();
        clock = std::make_unique<WallClock>();
    }
    RecordingFetcher recorder(*base);
    const auto result = run_personas(plans, recorder, *clock, ctx.ruleset, reader, ro, hook);
    const auto transcript = recorder.transcript();
    std::vector<std::string> jars;
    for (const auto& p : plans)
        jars.push_back(p.identity().cookie_jar);
    const auto isolation = audit_isolation(transcript, result.observations, jars, ro.freshness_bound);

    StageWriter w(ctx.ws, "run");
    w.write("visits.jsonl", jsonl(result.visits));
    w.write("observations.jsonl", jsonl(result.observations));
    w.write("transcript.jsonl", jsonl(transcript));
    w.write("isolation.json", json(isolation).dump(2) + "\n");
    if (world) {
        w.write("world_events.jsonl", jsonl(world->transcript()));
        std::ostringstream img, kw;
        write_fixture_store(img, world->image_fixtures(), "key", "labels");
        write_fixture_store(kw, world->keyword_fixtures(), "url", "keywords");
        w.write("fixtures/images.jsonl", img.str());
        w.write("fixtures/keywords.jsonl", kw.str());
    }
    w.commit(m);
    ctx.out_ << "run: " << result.visits.size() << " visits, " << result.observations.size() << " ad observations ("
             << isolation.stale << " stale, " << isolation.failed << " failed, " << isolation.dropped
             << " dropped), isolation " << (isolation.ok() ? "ok" : "VIOLATED") << "\n";
    if (!isolation.ok())
        throw Error("run: persona cookie jars reached ad landing pages");
}

// identify: observations -> ad labels
void stage_identify(Context& ctx)
{
    const auto obs_path = ctx.ws.require("run", "observations.jsonl");
    std::string images = ctx.o.image_fixtures;
    std::string keywords = ctx.o.keyword_fixtures;
    if (images.empty() && fs::exists(ctx.ws.file("run", "fixtures/images.jsonl")))
        images = ctx.ws.file("run", "fixtures/images.jsonl").string();
    if (keywords.empty() && fs::exists(ctx.ws.file("run", "fixtures/keywords.jsonl")))
        keywords = ctx.ws.file("run", "fixtures/keywords.jsonl").string();

    StageManifest m;
    m.stage = "identify";
    m.inputs = ctx.resource_hashes();
    m.inputs["observations"] = sha256_file(obs_path);
    m.inputs["product_rules"] = sha256_file(ctx.o.product_rules);
    m.inputs["blocklist"] = sha256_file(ctx.o.blocklist);
    m.inputs["stopwords"] = sha256_file(ctx.o.stopwords);
    if (!images.empty())
        m.inputs["image_fixtures"] = sha256_file(images);
    if (!keywords.empty())
        m.inputs["keyword_fixtures"] = sha256_file(keywords);
    if (ctx.skip(m))
        return;

    const auto observations = read_jsonl_file<AdObservation>(obs_path, "observation");
    const auto rules = ProductRules::load(ctx.o.product_rules, &ctx.ruleset);
    std::optional<FixtureImageLabeler> image_client;
    std::optional<FixtureKeywordService> keyword_client;
    if (!images.empty())
        image_client.emplace(FixtureImageLabeler::load(images).entries());
    if (!keywords.empty())
        keyword_client.emplace(FixtureKeywordService::load(keywords).entries());

    IdentifyContext ictx;
    ictx.dictionary = &ctx.dictionary;
    ictx.taxonomy = &ctx.taxonomy;
    ictx.product_rules = &rules;
    ictx.image_labeler = image_client ? &*image_client : nullptr;
    ictx.keyword_service = keyword_client ? &*keyword_client : nullptr;
    ictx.title_blocklist = load_word_set(ctx.o.blocklist);
    ictx.stopwords = load_word_set(ctx.o.stopwords);

    std::vector<AdLabel> labels;
    std::map<std::string, int> methods;
    for (const auto& o : observations) {
        labels.push_back(identify(o, ictx));
        ++methods[std::string(to_string(labels.back().method))];
    }
    StageWriter w(ctx.ws, "identify");
    w.write("labels.jsonl", jsonl(labels));
    w.write("summary.json", json{{"labels", labels.size()}, {"methods", methods}}.dump(2) + "\n");
    w.commit(m);
    ctx.out_ << "identify: " << labels.size() << " labels";
    for (const auto& [k, v] : methods)
        ctx.out_ << ", " << k << "=" << v;
    ctx.out_ << "\n";
}

// score: labels -> TTK/BAiLP per day and category shares
void stage_score(Context& ctx)
{
    const auto labels_path = ctx.ws.require("identify", "labels.jsonl");
    const auto obs_path = ctx.ws.require("run", "observations.jsonl");
    const auto features_path = ctx.ws.require("classify", "features.jsonl");
    const auto personas_path = ctx.ws.require("persona", "personas.jsonl");
    const auto platforms_path = ctx.ws.require("intersect", "platforms.txt");
    StageManifest m;
    m.stage = "score";
    m.inputs = {{"labels", sha256_file(labels_path)},
                {"observations", sha256_file(obs_path)},
                {"features", sha256_file(features_path)},
                {"personas", sha256_file(personas_path)},
                {"platforms", sha256_file(platforms_path)}};
    m.params = {{"days", ctx.o.days}, {"cumulative", ctx.o.cumulative}};
    if (ctx.skip(m))
        return;

    const auto observations = read_jsonl_file<AdObservation>(obs_path, "observation");
    const auto labels = read_jsonl_file<AdLabel>(labels_path, "label");
    const auto ads = join_labels(observations, labels);
    std::map<std::string, std::vector<std::string>> features;
    for (auto& f : read_jsonl_file<PageFeatures>(features_path, "features"))
        features[f.url] = std::move(f.terms);
    const auto plans = read_jsonl_file<PersonaPlan>(personas_path, "persona plan");
    const auto platforms = read_lines(platforms_path);

    std::string blank;
    std::vector<ScoreSubject> subjects;
    std::map<std::string, KeywordSet> by_interest;
    for (const auto& plan : plans) {
        for (const auto& phase : plan.phases) {
            if (phase.spec.is_blank()) {
                blank = plan.name;
                continue;
            }
            std::vector<std::vector<std::string>> lists;
            for (const auto& page : phase.spec.training_pages) {
                auto it = features.find(page);
                if (it == features.end())
                    throw InputError("score: no features for training page " + page);
                lists.push_back(it->second);
            }
            auto kt = keyword_set(lists);
            by_interest.emplace(phase.spec.interest, kt);
            subjects.push_back({plan.name, phase.spec.interest, std::move(kt)});
        }
    }
    if (blank.empty())
        throw InputError("score: no blank persona among the personas");
    for (const auto& [interest, kt] : by_interest)
        subjects.push_back({blank, interest, kt});

    ScoreOptions so;
    so.horizon_days = ctx.o.days;
    so.cumulative = ctx.o.cumulative;
    const auto rows = score_series(ads, subjects, blank, platforms, so);

    std::vector<ShareRecord> shares;
    for (const auto& plan : plans)
        for (const auto& [platform, days] : category_share_timeline(ads, plan.name, platforms, ctx.o.days))
            for (const auto& [day, s] : days)
                shares.push_back({plan.name, platform, day, s});

    std::ostringstream csv, rows_jsonl, shares_jsonl;
    write_scores_csv(csv, rows);
    write_scores_jsonl(rows_jsonl, rows);
    write_shares_jsonl(shares_jsonl, shares);
    StageWriter w(ctx.ws, "score");
    w.write("scores.csv", csv.str());
    w.write("scores.jsonl", rows_jsonl.str());
    w.write("shares.jsonl", shares_jsonl.str());
    w.commit(m);
    ctx.out_ << "score: " << rows.size() << " rows for " << subjects.size() << " persona/interest pairs\n";
}

// report: scores -> SVG charts and CSV tables
void stage_report(Context& ctx)
{
    const auto scores_path = ctx.ws.require("score", "scores.jsonl");
    const auto shares_path = ctx.ws.require("score", "shares.jsonl");
    const auto personas_path = ctx.ws.require("persona", "personas.jsonl");
    StageManifest m;
    m.stage = "report";
    m.inputs = {{"scores", sha256_file(scores_path)},
                {"shares", sha256_file(shares_path)},
                {"personas", sha256_file(personas_path)}};
    if (ctx.skip(m))
        return;

    ReportInput input;
    {
        std::ifstream in(scores_path);
        input.scores = read_scores_jsonl(in);
    }
    {
        std::ifstream in(shares_path);
        input.shares = read_shares_jsonl(in);
    }
    for (const auto& plan : read_jsonl_file<PersonaPlan>(personas_path, "persona plan"))
        if (plan.phases.size() > 1)
            input.switch_days[plan.name] = plan.phases[1].start_day;

    StageWriter w(ctx.ws, "report");
    const auto files = render_report(input, w.dir());
    w.commit(m);
    ctx.out_ << "report: " << files.size() << " files in " << ctx.ws.stage_dir("report").string() << "\n";
}

void stage_simulate(Context& ctx)
{
    stage_parse(ctx);
    stage_intersect(ctx);
    stage_classify(ctx);
    stage_persona(ctx);
    stage_run(ctx);
    stage_identify(ctx);
    stage_score(ctx);
    stage_report(ctx);
}

std::string prefixed(const std::string& stage, const std::string& message)
{
    if (message.starts_with(stage + ":"))
        return "adxprobe " + message;
    return "adxprobe " + stage + ": " + message;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Measure behavioral ad targeting of ad exchanges with synthetic personas", "adxprobe"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--workspace", o.workspace, "Workspace directory")->capture_default_str();
    app.add_option("--ruleset", o.ruleset, "Exchange prefix rules (JSONL)")->capture_default_str();
    app.add_option("--taxonomy", o.taxonomy, "Category taxonomy (JSONL)")->capture_default_str();
    app.add_option("--dict", o.dict, "Segmentation dictionary")->capture_default_str();
    app.add_option("--mode", o.mode, "sim or live (default: sim when --scenario is given)");
    app.add_option("--scenario", o.scenario, "Simulation scenario (JSON)");
    app.add_option("--seed", o.seed, "Clustering seed")->capture_default_str();
    app.add_option("--mean-gap", o.mean_gap, "Mean seconds between visits")->capture_default_str();
    app.add_option("--days", o.days, "Measurement horizon in days")->capture_default_str();
    app.add_option("--day-length", o.day_length, "Seconds per day")->capture_default_str();
    app.add_option("--freshness-bound", o.freshness_bound, "Max seconds from ad discovery to landing fetch")
        ->capture_default_str();
    app.add_flag("--force", o.force, "Re-run stages even when inputs are unchanged");

    auto* parse = app.add_subcommand("parse", "Request log -> monitor matrix");
    parse->add_option("--log", o.log, "Request log (JSONL)");
    auto* intersect = app.add_subcommand("intersect", "Matrix + platforms -> pages monitored by all");
    intersect->add_option("--platforms", o.platforms, "Comma-separated platform ids");
    auto* classify = app.add_subcommand("classify", "Pages -> clusters and category labels");
    classify->add_option("--texts", o.texts, "Page HTML (JSONL of {url, html}); fetched when absent");
    classify->add_option("--min-cjk", o.min_cjk, "Minimum CJK ratio")->capture_default_str();
    classify->add_option("--k-min", o.k_min)->capture_default_str();
    classify->add_option("--k-max", o.k_max)->capture_default_str();
    auto* persona = app.add_subcommand("persona", "Labeled pages -> persona plans");
    persona->add_option("--controls", o.controls, "Five control page URLs, one per line");
    persona->add_option("--persona", o.personas, "name:interest[:seed[:user-agent]]; interest BLANK for the baseline");
    persona->add_option("--switch", o.switches, "name:day:interest");
    persona->add_option("--user-agent", o.user_agent)->capture_default_str();
    auto* run = app.add_subcommand("run", "Execute persona schedules and collect ads");
    auto* reader_opt = run->add_option("--reader-jar", o.reader_jar, "Cookie jar of the ad reader");
    run->add_option("--threads", o.threads, "Ad reader threads")->capture_default_str();
    auto* ident = app.add_subcommand("identify", "Ad observations -> keywords and categories");
    ident->add_option("--image-fixtures", o.image_fixtures);
    ident->add_option("--keyword-fixtures", o.keyword_fixtures);
    ident->add_option("--product-rules", o.product_rules)->capture_default_str();
    ident->add_option("--blocklist", o.blocklist)->capture_default_str();
    ident->add_option("--stopwords", o.stopwords)->capture_default_str();
    auto* score = app.add_subcommand("score", "Labels -> TTK / BAiLP series and category shares");
    score->add_flag("--cumulative", o.cumulative, "Use ads of days 1..d instead of day d");
    auto* report = app.add_subcommand("report", "Scores -> SVG charts and CSV tables");
    auto* simulate = app.add_subcommand("simulate", "Run every stage against a simulated ecosystem");
    simulate->add_option("--platforms", o.platforms, "Comma-separated platform ids");
    for (auto* sub : app.get_subcommands({}))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "adxprobe: " << e.what() << "\n" << "run 'adxprobe --help' for usage\n";
        return kExitUsage;
    }

    std::set<std::string> explicit_flags;
    for (const auto* opt : app.get_options())
        if (opt->count() > 0)
            explicit_flags.insert(opt->get_name(false, true).substr(2));
    if (reader_opt->count() > 0)
        explicit_flags.insert("reader-jar");

    std::string stage = "adxprobe";
    try {
        if (simulate->parsed()) {
            stage = "simulate";
            if (o.mode.empty())
                o.mode = "sim";
            if (o.mode == "sim" && o.scenario.empty())
                o.scenario = (kDataDir / "scenarios" / "demo.json").string();
        }
        Context ctx(o, explicit_flags, out);
        if (parse->parsed()) {
            stage = "parse";
            stage_parse(ctx);
        } else if (intersect->parsed()) {
            stage = "intersect";
            stage_intersect(ctx);
        } else if (classify->parsed()) {
            stage = "classify";
            stage_classify(ctx);
        } else if (persona->parsed()) {
            stage = "persona";
            stage_persona(ctx);
        } else if (run->parsed()) {
            stage = "run";
            stage_run(ctx);
        } else if (ident->parsed()) {
            stage = "identify";
            stage_identify(ctx);
        } else if (score->parsed()) {
            stage = "score";
            stage_score(ctx);
        } else if (report->parsed()) {
            stage = "report";
            stage_report(ctx);
        } else if (simulate->parsed()) {
            if (ctx.o.mode != "sim")
                throw UsageError("simulate runs in sim mode only");
            stage_simulate(ctx);
        }
    } catch (const UsageError& e) {
        err << prefixed(stage, e.what()) << "\n";
        return kExitUsage;
    } catch (const InputError& e) {
        err << prefixed(stage, e.what()) << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << prefixed(stage, std::string("stage failed: ") + e.what()) << "\n";
        return kExitStage;
    }
    return kExitOk;
}

} // namespace adxprobe
