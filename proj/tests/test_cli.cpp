#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "golden.hpp"
#include "temp_dir.hpp"
#include "vtc/cli.hpp"
#include "vtc/dumps.hpp"
#include "vtc/run_config.hpp"

using namespace vtc;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

// Parses the reduction_pct column of the flops CSV block.
std::vector<double> reductions(const std::string& out) {
  std::vector<double> v;
  bool in_csv = false;
  for (const auto& l : lines(out)) {
    if (l.rfind("frames,query_tokens", 0) == 0) {
      in_csv = true;
      continue;
    }
    if (in_csv && !l.empty()) v.push_back(std::stod(l.substr(l.rfind(',') + 1)));
  }
  return v;
}

}  // namespace

TEST_CASE("schedule command") {
  const auto r = run({"schedule", "--format", "csv"});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 30);
  CHECK(ls[0] == "layer,tokens_per_frame");
  CHECK(ls[1] == "0,16");
  CHECK(ls.back().substr(ls.back().find(',') + 1) == "1");

  const auto c = run({"schedule", "--kind", "constant", "--format", "csv"});
  REQUIRE(c.code == kExitOk);
  for (std::size_t i = 1; i < lines(c.out).size(); ++i) CHECK(lines(c.out)[i].ends_with(",16"));

  CHECK(run({"schedule", "--layers", "0"}).code == kExitUsage);
  CHECK(run({"schedule", "--kind", "spiral"}).code == kExitUsage);
  CHECK(run({"nonsense"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("compress command") {
  TempDir dir;
  const auto in = (dir / "in.tokd").string();
  REQUIRE(run({"gen-tokens", "--frames", "2", "--tokens", "16", "--width", "3", "--seed", "4", "-o", in}).code ==
          kExitOk);
  const auto src = read_token_dump(in);

  const auto id = (dir / "id.tokd").string();
  REQUIRE(run({"compress", "-i", in, "-o", id, "--kind", "constant"}).code == kExitOk);
  CHECK(read_file_bytes(id) == read_file_bytes(in));

  const auto cos = (dir / "cos.tokd").string();
  REQUIRE(run({"compress", "-i", in, "-o", cos, "--kind", "cosine", "--strategy", "suffix"}).code == kExitOk);
  const auto out = read_token_dump(cos);
  CHECK(out.frames() == 2);
  CHECK(out.slots() == 1);
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t w = 0; w < 3; ++w) CHECK(out.at(f, 0, w) == src.at(f, 15, w));

  const auto mismatch = run({"compress", "-i", in, "-o", cos, "--n1", "8"});
  CHECK(mismatch.code == kExitValidation);
  CHECK(mismatch.err.find("tokens_per_frame=16") != std::string::npos);

  auto bytes = read_file_bytes(in);
  bytes.resize(bytes.size() - 5);
  write_file_atomic(dir / "short.tokd", bytes);
  const auto trunc = run({"compress", "-i", (dir / "short.tokd").string(), "-o", cos});
  CHECK(trunc.code == kExitValidation);
  CHECK(run({"compress", "-i", (dir / "missing.tokd").string(), "-o", cos}).code == kExitValidation);
}

TEST_CASE("toy dumps score like the in-memory blocks") {
  TempDir dir;
  const auto d = (dir / "seg").string();
  REQUIRE(run({"dump-attention", "--source", "toy", "--out-dir", d, "--frames", "48", "--tokens", "4", "--seed",
               "3"})
              .code == kExitOk);
  const auto index = DumpIndex::load(dir / "seg" / "index.txt");
  CHECK(index.num_frames() == 48);

  const auto seg = run({"score", "--index", (dir / "seg" / "index.txt").string(), "--k", "4"});
  REQUIRE(seg.code == kExitOk);
  CHECK(lines(seg.out).size() == 49);

  // one window covers T <= 64, so global and segmented scoring agree
  const auto g = (dir / "glob").string();
  REQUIRE(run({"dump-attention", "--source", "toy", "--out-dir", g, "--frames", "48", "--tokens", "4", "--seed", "3",
               "--global"})
              .code == kExitOk);
  const auto glob = run({"score", "--index", (dir / "glob" / "index.txt").string(), "--global", "--k", "4"});
  REQUIRE(glob.code == kExitOk);
  CHECK(glob.out == seg.out);

  const auto single =
      run({"score", "--attention", (dir / "glob" / "window_0_48.atnd").string(), "--global", "--k", "4"});
  REQUIRE(single.code == kExitOk);
  CHECK(single.out == seg.out);

  const auto all = run({"score", "--index", (dir / "seg" / "index.txt").string(), "--k", "100"});
  REQUIRE(all.code == kExitOk);
  for (std::size_t i = 1; i < lines(all.out).size(); ++i) CHECK(lines(all.out)[i].ends_with(",1"));

  CHECK(run({"score"}).code == kExitUsage);
}

TEST_CASE("oracle dumps reproduce the biased fixture ranking") {
  TempDir dir;
  REQUIRE(run({"dump-attention", "--source", "oracle", "--out-dir", dir.path().string()}).code == kExitOk);
  const auto sel = (dir / "sel.csv").string();
  const auto r = run({"score", "--index", (dir / "index.txt").string(), "--k", "1", "--selection", sel});
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(read_file_text(sel));
  REQUIRE(ls.size() == 2);
  CHECK(ls[1].rfind("128,", 0) == 0);
}

TEST_CASE("flops command") {
  const auto r = run({"flops"});
  REQUIRE(r.code == kExitOk);
  const auto red = reductions(r.out);
  REQUIRE(red.size() == 3);
  CHECK(std::abs(red[0] - 53.0) <= 5.0);
  CHECK(std::abs(red[1] - 56.0) <= 5.0);
  CHECK(std::abs(red[2] - 58.0) <= 5.0);

  const auto c = run({"flops", "--kind", "constant"});
  REQUIRE(c.code == kExitOk);
  for (double v : reductions(c.out)) CHECK(v == 0.0);

  const auto custom = run({"flops", "--model-layers", "12", "--model-width", "768", "--heads", "12", "--kv-heads",
                           "12", "--head-width", "64", "--mlp-width", "3072", "--frames", "64"});
  REQUIRE(custom.code == kExitOk);
  CHECK(custom.out.find("768") != std::string::npos);
  CHECK(reductions(custom.out).size() == 1);

  CHECK(run({"flops", "--unit", "joules"}).code == kExitUsage);
}

TEST_CASE("bench bias matches the golden report") {
  const auto r = run({"bench", "bias", "--sweep"});
  REQUIRE(r.code == kExitOk);
  check_golden("bench_bias.csv", r.out);
  const auto ls = lines(r.out);
  CHECK(ls[1].ends_with(",1"));  // biased fixture, segmented rank 1
  CHECK_FALSE(ls[1].ends_with(",1,1"));
  CHECK(ls[2].ends_with(",1,1"));
  CHECK(run({"bench", "bias", "--sweep"}).out == r.out);
}

TEST_CASE("bench niah") {
  const auto empty = run({"bench", "niah", "--seeds", "0"});
  REQUIRE(empty.code == kExitOk);
  CHECK(lines(empty.out).size() == 1);

  TempDir dir;
  const auto sum = (dir / "sum.csv").string();
  const auto a = run({"bench", "niah", "--seeds", "3", "--frames", "1024", "--hops", "2", "--signals", "0,3",
                      "--summary", sum});
  REQUIRE(a.code == kExitOk);
  CHECK(lines(a.out).size() == 7);
  const auto b = run({"bench", "niah", "--seeds", "3", "--frames", "1024", "--hops", "2", "--signals", "0,3",
                      "--threads", "3"});
  CHECK(a.out == b.out);
  CHECK(lines(read_file_text(sum)).size() == 3);

  write_file_atomic(dir / "niah.csv", a.out);
  const auto rep = run({"report", (dir / "niah.csv").string()});
  CHECK(rep.code == kExitOk);
  CHECK_FALSE(rep.out.empty());
}

TEST_CASE("config handling") {
  TempDir dir;
  write_file_atomic(dir / "run.cfg", std::string("schedule.kind=constant\n"));
  const auto r = run({"schedule", "--format", "csv", "--config", (dir / "run.cfg").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(lines(r.out).back() == "28,16");

  ::setenv(kConfigEnv, (dir / "run.cfg").c_str(), 1);
  const auto env = run({"schedule", "--format", "csv"});
  ::unsetenv(kConfigEnv);
  CHECK(env.out == r.out);

  CHECK(run({"schedule", "--set", "schedule.kind=constant", "--format", "csv"}).out == r.out);

  write_file_atomic(dir / "bad.cfg", std::string("no.such.key=1\n"));
  const auto bad = run({"config", "--config", (dir / "bad.cfg").string()});
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("no.such.key") != std::string::npos);

  const auto printed = run({"config"});
  REQUIRE(printed.code == kExitOk);
  write_file_atomic(dir / "round.cfg", printed.out);
  CHECK(run({"config", "--config", (dir / "round.cfg").string()}).out == printed.out);
}
