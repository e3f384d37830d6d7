#include <catch_amalgamated.hpp>

#include <sstream>
#include <sys/wait.h>

#include "stancelab/cli.hpp"
#include "stancelab/synthetic.hpp"
#include "support.hpp"

using namespace stancelab;
using Catch::Matchers::ContainsSubstring;
using testing_support::TempDir;

namespace {

struct Outcome {
    int code = 0;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "stancelab");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// Small corpus files plus a config that trains in well under a second.
struct Workspace {
    TempDir dir{"cli"};
    std::filesystem::path data, sarcasm, config;

    Workspace() {
        synthetic::TransferCorpusOptions o;
        o.targets = {"A", "B"};
        o.train_per_target = 30;
        o.test_per_target = 12;
        o.sarcasm_size = 30;
        o.fillers = 8;
        auto c = synthetic::make_transfer_corpus(o, 2);
        data = dir.write("stance.tsv", format_stance_tsv(c.stance));
        sarcasm = dir.write("ST.tsv", format_sarcasm_tsv(c.sarcasm.samples));
        config = dir.write("spec.tsv", "# tiny run\n"
                                       "data\t" + data.string() + "\n"
                                       "embed_dim\t4\nconv_filters\t4\nlstm_hidden\t3\nmax_len\t10\n"
                                       "lr_init\t0.005\nlr_floor\t0.0001\nintermediate_lr_floor\t0.0001\n"
                                       "max_epochs\t2\nmin_epochs\t1\npatience\t1\nseeds\t1,2\n");
    }

    std::string out(const std::string& name) const { return (dir / name).string(); }
};

std::map<std::string, std::string> manifest(const std::filesystem::path& rundir) {
    std::map<std::string, std::string> m;
    for (auto& line : read_lines(rundir / "manifest.tsv")) {
        auto f = split(line, '\t');
        if (f.size() == 2) m[f[0]] = f[1];
    }
    return m;
}

}  // namespace

TEST_CASE("finetune with an override writes results and exits 0") {
    Workspace ws;
    auto r = run({"finetune", "--config", ws.config.string(), "--set", "seed=7", "--out", ws.out("ft")});
    INFO(r.err);
    REQUIRE(r.code == cli::kOk);
    const auto rundir = ws.dir / "ft";
    CHECK(std::filesystem::exists(rundir / "results.tsv"));
    CHECK(std::filesystem::exists(rundir / "table.tsv"));
    CHECK(std::filesystem::exists(rundir / "predictions" / "A-seed7.tsv"));
    auto m = manifest(rundir);
    CHECK(m.at("seeds") == "7");
    CHECK(m.at("status") == "completed");
    CHECK(m.at("verb") == "finetune");
    CHECK(m.at("version") == cli::kVersion);
    CHECK(m.at("fingerprint.data") == hex64(fnv1a(read_file(ws.data))));
    CHECK(read_lines(rundir / "table.tsv").at(2).starts_with("Ours-Embedding\t"));
}

TEST_CASE("usage errors exit 1") {
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({}).code == cli::kUsage);
    Workspace ws;
    auto bad_key = run({"finetune", "--config", ws.config.string(), "--set", "wibble=3", "--out", ws.out("x")});
    CHECK(bad_key.code == cli::kUsage);
    CHECK_THAT(bad_key.err, ContainsSubstring("wibble"));
    CHECK(run({"finetune", "--config", ws.config.string(), "--set", "noequals", "--out", ws.out("y")}).code == cli::kUsage);
    CHECK(run({"finetune", "--config", ws.config.string(), "--set", "patience=soon", "--out", ws.out("z")}).code ==
          cli::kUsage);
    CHECK(run({"--version"}).code == cli::kOk);
}

TEST_CASE("the installed binary prints usage for an unknown verb") {
    TempDir dir("cli");
    const std::string cmd = std::string(STANCELAB_CLI_PATH) + " frobnicate > " + (dir / "o.txt").string() + " 2> " +
                            (dir / "e.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 1);
    CHECK_THAT(read_file(dir / "e.txt"), ContainsSubstring("finetune"));
}

TEST_CASE("missing data exits 2 naming the path") {
    Workspace ws;
    auto r = run({"finetune", "--config", ws.config.string(), "--set", "data=" + ws.out("absent.tsv"), "--out",
                  ws.out("miss")});
    CHECK(r.code == cli::kData);
    CHECK_THAT(r.err, ContainsSubstring("absent.tsv"));
    auto m = manifest(ws.dir / "miss");
    CHECK(m.at("status") == "aborted");
    CHECK(m.at("fingerprint.data") == "missing");
}

TEST_CASE("non-finite training exits 3") {
    Workspace ws;
    auto r = run({"finetune", "--config", ws.config.string(), "--set", "lr_init=1e300", "--set", "lr_floor=1e299",
                  "--set", "intermediate_lr_floor=1e299", "--out", ws.out("nan")});
    CHECK(r.code == cli::kNumeric);
    CHECK(manifest(ws.dir / "nan").at("status") == "aborted");
}

TEST_CASE("manifests are reproducible and differ only where the config does") {
    Workspace ws;
    REQUIRE(run({"finetune", "--config", ws.config.string(), "--out", ws.out("a")}).code == 0);
    REQUIRE(run({"finetune", "--config", ws.config.string(), "--out", ws.out("b")}).code == 0);
    REQUIRE(run({"finetune", "--config", ws.config.string(), "--set", "seeds=1,3", "--out", ws.out("c")}).code == 0);
    CHECK(read_file(ws.dir / "a" / "manifest.tsv") == read_file(ws.dir / "b" / "manifest.tsv"));
    CHECK(read_file(ws.dir / "a" / "results.tsv") == read_file(ws.dir / "b" / "results.tsv"));

    auto la = read_lines(ws.dir / "a" / "manifest.tsv"), lc = read_lines(ws.dir / "c" / "manifest.tsv");
    REQUIRE(la.size() == lc.size());
    std::vector<std::string> differing;
    for (std::size_t i = 0; i < la.size(); ++i)
        if (la[i] != lc[i]) differing.push_back(split(la[i], '\t')[0]);
    CHECK(differing == std::vector<std::string>{"seeds"});

    // The manifest is itself a config: re-running from it reproduces the results.
    REQUIRE(run({"finetune", "--config", (ws.dir / "a" / "manifest.tsv").string(), "--out", ws.out("d")}).code == 0);
    CHECK(read_file(ws.dir / "a" / "results.tsv") == read_file(ws.dir / "d" / "results.tsv"));
}

TEST_CASE("overrides apply in order and the last one wins") {
    cli::RunConfig cfg;
    cli::apply_override(cfg, "patience=3");
    cli::apply_override(cfg, "patience=4");
    CHECK(cfg.spec.train.patience == 4);
    cli::apply_override(cfg, "seeds=5, 6");
    CHECK(cfg.spec.seeds == std::vector<std::uint64_t>{5, 6});
    cli::apply_override(cfg, "L=12");
    CHECK(cfg.spec.model.max_len == 12);
    CHECK_THROWS_AS(cli::apply_override(cfg, "seeds="), ConfigError);
    CHECK_FALSE(cfg.set("fingerprint.data", "abc"));
}

TEST_CASE("run directory resolution") {
    CHECK(cli::resolve_rundir("x/y", "finetune") == std::filesystem::path("x/y"));
    ::setenv("STANCELAB_RUNDIR", "/tmp/root", 1);
    CHECK(cli::resolve_rundir("", "ablate") == std::filesystem::path("/tmp/root/ablate"));
    ::unsetenv("STANCELAB_RUNDIR");
    CHECK(cli::resolve_rundir("", "ablate") == std::filesystem::path("runs/ablate"));
}

TEST_CASE("every verb writes only inside its run directory") {
    Workspace ws;
    auto before = std::distance(std::filesystem::directory_iterator(ws.dir.path()), {});
    const std::string cfg = ws.config.string();
    const std::string st = "sarcasm=" + ws.sarcasm.string();
    REQUIRE(run({"preprocess", "--config", cfg, "--set", st, "--out", ws.out("runs/pre")}).code == 0);
    CHECK(std::filesystem::exists(ws.dir / "runs/pre/vocab.tsv"));
    CHECK(std::filesystem::exists(ws.dir / "runs/pre/sarcasm.tsv"));

    REQUIRE(run({"pretrain", "--config", cfg, "--set", st, "--set", "seeds=1", "--out", ws.out("runs/pt")}).code == 0);
    const auto ck = ws.dir / "runs/pt/checkpoints/seed1";
    CHECK(std::filesystem::exists(ck / "weights.bin"));

    auto fromck = run({"finetune", "--config", cfg, "--set", st, "--set", "checkpoint=" + ck.string(), "--set", "seeds=1",
                       "--out", ws.out("runs/ck")});
    INFO(fromck.err);
    REQUIRE(fromck.code == 0);
    CHECK(read_lines(ws.dir / "runs/ck/table.tsv").at(2).starts_with("ST\t"));

    REQUIRE(run({"finetune", "--config", cfg, "--set", st, "--set", "seeds=1", "--out", ws.out("runs/base")}).code == 0);
    REQUIRE(run({"cross-target", "--config", cfg, "--set", "seeds=1", "--out", ws.out("runs/ct")}).code == 0);
    CHECK(read_lines(ws.dir / "runs/ct/table.tsv").at(2).starts_with("Ours\t"));

    auto ab = run({"ablate", "--config", cfg, "--set", st, "--set", "seeds=1", "--set", "target=A", "--set",
                   "variants=encoder-only,+conv+bilstm:with", "--out", ws.out("runs/ab")});
    INFO(ab.err);
    REQUIRE(ab.code == 0);
    auto table = read_lines(ws.dir / "runs/ab/table.tsv");
    CHECK(table.at(1) == "Model\tstance:A\tstance:Avg");
    CHECK(table.at(2).starts_with("encoder\t"));
    CHECK(table.at(3).starts_with("ST+encoder+Conv+BiLSTM\t"));

    REQUIRE(run({"similarity", "--config", cfg, "--out", ws.out("runs/sim")}).code == 0);
    CHECK(read_lines(ws.dir / "runs/sim/similarity_scores.tsv").size() == 3);

    auto rep = run({"report", "--results", "stance=" + ws.out("runs/ab/results.tsv"), "--table", "ablation",
                    "--out", ws.out("runs/rep")});
    INFO(rep.err);
    REQUIRE(rep.code == 0);
    CHECK(read_file(ws.dir / "runs/rep/table.tsv") == read_file(ws.dir / "runs/ab/table.tsv"));

    auto gc = run({"gradcheck", "--seeds", "2", "--out", ws.out("runs/gc")});
    CHECK(gc.code == 0);
    CHECK(read_lines(ws.dir / "runs/gc/gradcheck.tsv").size() == 3);

    auto after = std::distance(std::filesystem::directory_iterator(ws.dir.path()), {});
    CHECK(after == before + 1);  // only runs/
}

TEST_CASE("report computes the recovery rate from prediction files") {
    TempDir dir("cli");
    std::vector<PredictionRecord> base, transfer;
    for (int i = 0; i < 20; ++i) {
        const std::string id = "t" + std::to_string(i);
        base.push_back({id, "x", 1, 0, true});
        transfer.push_back({id, "x", 1, i < 17 ? 1u : 2u, true});
    }
    base.push_back({"ok", "x", 0, 0, false});
    transfer.push_back({"ok", "x", 0, 0, false});
    write_file(dir / "base.tsv", format_records_tsv(base));
    write_file(dir / "transfer.tsv", format_records_tsv(transfer));
    auto r = run({"report", "--base", (dir / "base.tsv").string(), "--transfer", (dir / "transfer.tsv").string(), "--out",
                  (dir / "rep").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    auto lines = read_lines(dir / "rep" / "recovery.tsv");
    CHECK(lines.at(1) == "sarcasm_recovery\t0.850000");
    CHECK(lines.at(2) == "denominator\t20");
    CHECK(read_lines(dir / "rep" / "failures_base.tsv").size() == 21);
}
