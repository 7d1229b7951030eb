#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "addrkit/json_io.hpp"
#include "fixtures.hpp"

// End-to-end checks against the built binary. The test harness passes its
// location through ADDRKIT_CLI; a scratch directory comes via ADDRKIT_SCRATCH.

namespace fs = std::filesystem;
using addrkit::json;

namespace {

struct CliEnv {
    std::string binary;
    fs::path scratch;
    bool available = false;
};

CliEnv cli_env() {
    CliEnv env;
    const char* bin = std::getenv("ADDRKIT_CLI");
    const char* scratch = std::getenv("ADDRKIT_SCRATCH");
    if (!bin || !scratch) return env;
    env.binary = bin;
    env.scratch = fs::path(scratch) / "cli";
    fs::create_directories(env.scratch);
    env.available = true;
    return env;
}

int run(const std::string& cmdline) { return std::system(cmdline.c_str()); }

int exit_code(int system_status) {
    return WIFEXITED(system_status) ? WEXITSTATUS(system_status) : -1;
}

} // namespace

TEST_CASE("cli exit codes distinguish input and configuration errors") {
    const auto env = cli_env();
    if (!env.available) {
        WARN("ADDRKIT_CLI not set; skipping CLI tests");
        return;
    }
    const auto null_redirect = " > /dev/null 2>&1";

    // Unknown flag: configuration error, exit 2.
    CHECK(exit_code(run(env.binary + " stats --no-such-flag x" + null_redirect)) == 2);
    // Missing required input flag: exit 2.
    CHECK(exit_code(run(env.binary + " stats" + null_redirect)) == 2);
    // Unreadable input file: exit 1.
    const auto out = (env.scratch / "stats.json").string();
    CHECK(exit_code(run(env.binary + " stats --input /nonexistent.jsonl --output " + out +
                        null_redirect)) == 1);
    // Bad configuration value: exit 2.
    const auto corpus = (env.scratch / "tiny.jsonl").string();
    addrkit::write_text_file(corpus, "{\"address\":\"hsr layout\"}\n");
    CHECK(exit_code(run(env.binary + " stats --input " + corpus + " --format nope --output " +
                        out + null_redirect)) == 2);
    // Happy path: exit 0, and the input file is left untouched.
    const auto before = addrkit::file_digest(corpus);
    CHECK(exit_code(run(env.binary + " stats --input " + corpus + " --output " + out +
                        null_redirect)) == 0);
    CHECK(fs::exists(out));
    CHECK(fs::exists(out + ".manifest.json"));
    CHECK(addrkit::file_digest(corpus) == before);

    // The secondary corpus format works through the same flag.
    const auto csv = (env.scratch / "tiny.csv").string();
    addrkit::write_text_file(csv, "id,address,label\n1,hsr layout,SR00\n");
    CHECK(exit_code(run(env.binary + " stats --input " + csv + " --format csv --output " + out +
                        null_redirect)) == 0);
}

TEST_CASE("cli error messages name the offending flag") {
    const auto env = cli_env();
    if (!env.available) return;
    const auto err_path = (env.scratch / "stderr.txt").string();
    const int status =
        run(env.binary + " stats --input a --output b --bogus-flag 2> " + err_path);
    CHECK(exit_code(status) == 2);
    const auto text = addrkit::read_text_file(err_path);
    CHECK(text.find("--bogus-flag") != std::string::npos);

    // A missing required flag is named too.
    run(env.binary + " stats 2> " + err_path);
    CHECK(addrkit::read_text_file(err_path).find("--input") != std::string::npos);
}

TEST_CASE("cli preprocess reproduces the error-category fixtures") {
    const auto env = cli_env();
    if (!env.available) return;

    const auto corpus_path = (env.scratch / "fixture.jsonl").string();
    const auto artifacts_path = (env.scratch / "artifacts.json").string();
    const auto probe_path = (env.scratch / "probe.jsonl").string();
    const auto cleaned_path = (env.scratch / "cleaned.jsonl").string();

    addrkit::write_text_file(corpus_path, addrkit::to_jsonl(testutil::error_fixture_corpus()));
    REQUIRE(exit_code(run(env.binary + " build-artifacts --input " + corpus_path + " --output " +
                          artifacts_path + " > /dev/null")) == 0);

    addrkit::write_text_file(probe_path,
                             "{\"id\":\"t1\",\"address\":\"meenakshiclassic\"}\n"
                             "{\"id\":\"t2\",\"address\":\"lay out\"}\n"
                             "{\"id\":\"t3\",\"address\":\"appartments\"}\n"
                             "{\"id\":\"t4\",\"address\":\"sectarnoida\"}\n");
    REQUIRE(exit_code(run(env.binary + " preprocess --input " + probe_path + " --artifacts " +
                          artifacts_path + " --mode full --output " + cleaned_path +
                          " > /dev/null")) == 0);

    const auto rows = addrkit::load_cleaned(cleaned_path);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].tokens == std::vector<std::string>{"meenakshi", "classic"});
    CHECK(rows[1].tokens == std::vector<std::string>{"layout"});
    CHECK(rows[2].tokens == std::vector<std::string>{"apartments"});
    CHECK(rows[3].tokens == std::vector<std::string>{"sector", "noida"});
}

TEST_CASE("cli synth is byte-reproducible for a fixed seed") {
    const auto env = cli_env();
    if (!env.available) return;

    const auto a = (env.scratch / "synth_a.jsonl").string();
    const auto b = (env.scratch / "synth_b.jsonl").string();
    const std::string flags = " synth --addresses 300 --subregions 4 --seed 99 --output ";
    REQUIRE(exit_code(run(env.binary + flags + a + " --truth " + a + ".truth > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + flags + b + " --truth " + b + ".truth > /dev/null")) == 0);
    CHECK(addrkit::read_text_file(a) == addrkit::read_text_file(b));
    CHECK(addrkit::read_text_file(a + ".truth") == addrkit::read_text_file(b + ".truth"));
    CHECK(addrkit::read_text_file(a + ".manifest.json") ==
          addrkit::read_text_file(b + ".manifest.json"));
}

TEST_CASE("cli eval emits an accuracy summary") {
    const auto env = cli_env();
    if (!env.available) return;
    const fs::path dir = env.scratch / "evalrun";
    fs::create_directories(dir);
    auto p = [&](const char* name) { return (dir / name).string(); };

    REQUIRE(exit_code(run(env.binary + " synth --addresses 400 --subregions 3 --seed 5 --output " +
                          p("corpus.jsonl") + " > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " build-artifacts --input " + p("corpus.jsonl") +
                          " --output " + p("artifacts.json") + " > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " preprocess --input " + p("corpus.jsonl") +
                          " --artifacts " + p("artifacts.json") + " --mode full --output " +
                          p("cleaned.jsonl") + " > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " train-embed --input " + p("cleaned.jsonl") +
                          " --output " + p("embedding.json") +
                          " --dim 24 --epochs 2 --seed 5 > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " tfidf --input " + p("cleaned.jsonl") + " --output " +
                          p("tfidf.json") + " > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " train-clf --input " + p("cleaned.jsonl") +
                          " --embedding " + p("embedding.json") + " --tfidf " + p("tfidf.json") +
                          " --output " + p("clf.json") +
                          " --iters 150 --lr 0.5 --l2 0.001 --holdout 0.2 --split-seed 7"
                          " > /dev/null")) == 0);

    const auto summary_path = p("eval_summary.json");
    REQUIRE(exit_code(run(env.binary + " eval --input " + p("cleaned.jsonl") + " --embedding " +
                          p("embedding.json") + " --tfidf " + p("tfidf.json") + " --model " +
                          p("clf.json") + " --output " + p("report.json") +
                          " --holdout 0.2 --split-seed 7 > " + summary_path)) == 0);

    const auto summary = json::parse(addrkit::read_text_file(summary_path));
    REQUIRE(summary.contains("accuracy"));
    CHECK(summary["accuracy"].get<double>() >= 0.0);
    CHECK(summary["accuracy"].get<double>() <= 1.0);

    const auto report = json::parse(addrkit::read_text_file(p("report.json")));
    CHECK(report.contains("confusion"));
    CHECK(report.contains("max_prob_histogram"));
}

TEST_CASE("cli covers scoring, flagging and recovery subcommands") {
    const auto env = cli_env();
    if (!env.available) return;
    const fs::path dir = env.scratch / "fullrun";
    fs::create_directories(dir);
    auto p = [&](const char* name) { return (dir / name).string(); };

    REQUIRE(exit_code(run(env.binary +
                          " synth --addresses 500 --subregions 4 --seed 23 --output " +
                          p("corpus.jsonl") + " --truth " + p("truth.jsonl") + " > /dev/null")) ==
            0);
    REQUIRE(exit_code(run(env.binary + " build-artifacts --input " + p("corpus.jsonl") +
                          " --output " + p("artifacts.json") + " > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " preprocess --input " + p("corpus.jsonl") +
                          " --artifacts " + p("artifacts.json") + " --mode full --output " +
                          p("cleaned.jsonl") + " > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " train-embed --input " + p("cleaned.jsonl") +
                          " --output " + p("embedding.json") +
                          " --dim 16 --epochs 2 --seed 23 > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " tfidf --input " + p("cleaned.jsonl") + " --output " +
                          p("tfidf.json") + " > /dev/null")) == 0);
    REQUIRE(exit_code(run(env.binary + " train-clf --input " + p("cleaned.jsonl") +
                          " --embedding " + p("embedding.json") + " --tfidf " + p("tfidf.json") +
                          " --output " + p("clf.json") +
                          " --iters 100 --lr 0.5 --l2 0.001 > /dev/null")) == 0);

    SECTION("classify writes a prediction per record") {
        REQUIRE(exit_code(run(env.binary + " classify --input " + p("corpus.jsonl") +
                              " --artifacts " + p("artifacts.json") + " --mode full --embedding " +
                              p("embedding.json") + " --tfidf " + p("tfidf.json") + " --model " +
                              p("clf.json") + " --output " + p("predictions.jsonl") +
                              " > /dev/null")) == 0);
        std::ifstream in(p("predictions.jsonl"));
        std::string line;
        std::size_t lines = 0;
        while (std::getline(in, line)) {
            const auto obj = json::parse(line);
            CHECK(obj.contains("id"));
            CHECK(obj.contains("predicted"));
            CHECK(obj.contains("max_prob"));
            ++lines;
        }
        CHECK(lines == 500);
    }

    SECTION("lm-train, lm-score and flag emit the documented formats") {
        REQUIRE(exit_code(run(env.binary + " lm-train --input " + p("cleaned.jsonl") +
                              " --output " + p("lm.json") + " --order 2 > /dev/null")) == 0);
        REQUIRE(exit_code(run(env.binary + " lm-score --input " + p("cleaned.jsonl") +
                              " --model " + p("lm.json") + " --output " + p("scores.jsonl") +
                              " > /dev/null")) == 0);
        std::ifstream scores(p("scores.jsonl"));
        std::string line;
        REQUIRE(std::getline(scores, line));
        const auto first = json::parse(line);
        CHECK(first.contains("perplexity"));
        CHECK(first["perplexity"].get<double>() > 0.0);

        // Junk rows go in along with real ones; flags must name a status.
        addrkit::write_text_file(p("mixed.jsonl"),
                                 addrkit::read_text_file(p("corpus.jsonl")) +
                                     "{\"id\":\"junk1\",\"address\":\"dasdasdaasdad\"}\n");
        const auto flag_summary_path = p("flag_summary.json");
        REQUIRE(exit_code(run(env.binary + " flag --input " + p("mixed.jsonl") +
                              " --artifacts " + p("artifacts.json") + " --embedding " +
                              p("embedding.json") + " --tfidf " + p("tfidf.json") + " --clf " +
                              p("clf.json") + " --lm " + p("lm.json") + " --calibrate " +
                              p("cleaned.jsonl") + " --output " + p("flags.jsonl") + " > " +
                              flag_summary_path)) == 0);
        const auto summary = json::parse(addrkit::read_text_file(flag_summary_path));
        CHECK(summary["high_perplexity"].get<std::size_t>() >= 1);

        std::ifstream flags(p("flags.jsonl"));
        bool junk_flagged = false;
        while (std::getline(flags, line)) {
            const auto obj = json::parse(line);
            CHECK(obj.contains("status"));
            CHECK(obj.contains("max_prob"));
            CHECK(obj.contains("perplexity"));
            if (obj["id"] == "junk1") junk_flagged = obj["status"] == "high_perplexity";
        }
        CHECK(junk_flagged);
    }

    SECTION("recovery-report aggregates per-category rates") {
        REQUIRE(exit_code(run(env.binary + " recovery-report --corpus " + p("corpus.jsonl") +
                              " --truth " + p("truth.jsonl") + " --artifacts " +
                              p("artifacts.json") + " --output " + p("recovery.json") +
                              " > /dev/null")) == 0);
        const auto report = json::parse(addrkit::read_text_file(p("recovery.json")));
        CHECK(report.contains("categories"));
        CHECK(report["records"].get<std::size_t>() == 500);
        const auto& cats = report["categories"];
        REQUIRE(cats.contains("misspelling"));
        CHECK(cats["misspelling"].contains("rate"));
    }
}
