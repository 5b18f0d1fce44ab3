#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "ohc/pipeline.hpp"

using namespace ohc;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = OHC_FIXTURES;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A scratch directory removed when the test ends.
struct Scratch {
    fs::path root;
    explicit Scratch(const std::string& tag)
        : root(fs::temp_directory_path() / ("ohc-pipeline-" + tag + "-" + std::to_string(::getpid()))) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Scratch() { fs::remove_all(root); }
};

struct Run {
    int status = -1;
    std::string output;
};

Run cli(const Scratch& s, const std::string& args, const std::string& env = "") {
    const fs::path out = s.root / "cli.txt";
    const std::string cmd = env + " \"" + std::string(OHC_CLI) + "\" " + args + " > \"" + out.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out)};
}

PipelineConfig fixture_config(const fs::path& work) {
    auto cfg = PipelineConfig::load(kFixtures / "config.json");
    cfg.work = work;
    cfg.posts = kFixtures / "posts.jsonl";
    cfg.gold = kFixtures / "gold.jsonl";
    return cfg;
}

void prepare(const PipelineConfig& cfg) {
    std::ostringstream log;
    run_ingest(cfg, log);
    run_preprocess(cfg, log);
}

}  // namespace

TEST_CASE("config rejects unknown keys") {
    CHECK_NOTHROW(PipelineConfig::from_json_text("{}"));
    CHECK_THROWS_AS(PipelineConfig::from_json_text(R"({"modle": "cnn"})"), Error);
    CHECK_THROWS_AS(PipelineConfig::from_json_text(R"({"cnn": {"hiden": 3}})"), Error);
    CHECK_THROWS_AS(PipelineConfig::from_json_text("{not json"), Error);
}

TEST_CASE("config canonical text and hash are stable") {
    const auto cfg = PipelineConfig::load(kFixtures / "config.json");
    const auto again = PipelineConfig::from_json_text(cfg.to_json_text());
    CHECK(again.to_json_text() == cfg.to_json_text());
    CHECK(again.hash() == cfg.hash());
    CHECK(cfg.hash().size() == 16);
    CHECK(cfg.hash().find_first_not_of("0123456789abcdef") == std::string::npos);

    auto changed = cfg;
    changed.cnn.seed += 1;
    CHECK(changed.hash() != cfg.hash());
}

TEST_CASE("coinciding paths are rejected") {
    PipelineConfig cfg;
    cfg.work = "w";
    CHECK_NOTHROW(cfg.validate());
    cfg.reports = "w";
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("label before train reports a missing model") {
    Scratch s("nomodel");
    auto cfg = fixture_config(s.root / "work");
    prepare(cfg);
    cfg.model = "linear";
    std::ostringstream log;
    try {
        run_label(cfg, log);
        FAIL("label ran without a model");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("model not found") != std::string::npos);
    }
}

TEST_CASE("train, label and analyze by week") {
    Scratch s("week");
    auto cfg = fixture_config(s.root / "work");
    cfg.model = "linear";
    prepare(cfg);
    std::ostringstream log;
    run_train(cfg, log);
    run_label(cfg, log);
    CHECK(fs::exists(cfg.labels_dir() / "post_labels.csv"));
    run_analyze(cfg, "week", log);
    const auto csv = slurp(cfg.reports_dir() / "trajectory_week.csv");
    CHECK(csv.rfind("bin,topic,frequency,n_posts\n", 0) == 0);
    CHECK(csv.find("\n0,ALTR,") != std::string::npos);
    CHECK(fs::exists(cfg.reports_dir() / "trajectory_week_long.csv"));
    CHECK(fs::exists(cfg.reports_dir() / "manifest.json"));
    CHECK_THROWS_AS(run_analyze(cfg, "month", log), Error);
}

TEST_CASE("evaluation reports are reproducible") {
    Scratch s("eval");
    auto cfg = fixture_config(s.root / "work");
    prepare(cfg);
    std::ostringstream log;
    run_eval(cfg, {"linear"}, log);
    const auto first = slurp(cfg.reports_dir() / "eval_linear.csv");
    REQUIRE_FALSE(first.empty());
    CHECK(first.rfind("system,label,tp,fp,fn,precision,recall,f\nbsline,Micro,", 0) == 0);
    cfg.threads = 3;
    run_eval(cfg, {"linear"}, log);
    CHECK(slurp(cfg.reports_dir() / "eval_linear.csv") == first);
}

TEST_CASE("cli usage errors exit with status 2") {
    Scratch s("usage");
    const auto unknown = cli(s, "frobnicate");
    CHECK(unknown.status == 2);
    CHECK(unknown.output.find("Usage") != std::string::npos);
    CHECK(cli(s, "eval --no-such-flag").status == 2);
    CHECK(cli(s, "train").status == 2);  // --model is required
    CHECK(cli(s, "--help").status == 0);
}

TEST_CASE("cli runtime errors exit with status 1") {
    Scratch s("runtime");
    const auto work = (s.root / "work").string();
    const auto r = cli(s, "--work \"" + work + "\" label --model linear");
    CHECK(r.status == 1);
    CHECK(r.output.find("error:") != std::string::npos);
    CHECK(cli(s, "-c \"" + (s.root / "missing.json").string() + "\" preprocess").status == 1);
}

TEST_CASE("cli reads the config named by the environment") {
    Scratch s("env");
    const auto bad = s.root / "bad.json";
    std::ofstream(bad) << R"({"unknown_key": 1})";
    const auto r = cli(s, "--work \"" + (s.root / "work").string() + "\" preprocess",
                       "OHC_TOPICS_CONFIG=\"" + bad.string() + "\"");
    CHECK(r.status == 1);
    CHECK(r.output.find("unknown_key") != std::string::npos);
}
