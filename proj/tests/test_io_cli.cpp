#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "idbounds/io.hpp"

using namespace idbounds;

TEST_SUITE_BEGIN("io_cli");

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string("/tmp/idbounds_test_") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

struct CliRun {
  int exit_code = -1;
  std::string stdout_text;
};

CliRun run_cli(const std::string& args) {
  const char* bin = std::getenv("IDBOUNDS_BIN");
  if (!bin) return {};
  std::string cmd = std::string(bin) + " " + args + " > /tmp/idbounds_cli_out.txt 2>/dev/null";
  int rc = std::system(cmd.c_str());
  CliRun run;
  run.exit_code = WEXITSTATUS(rc);
  std::ifstream in("/tmp/idbounds_cli_out.txt");
  std::string line;
  while (std::getline(in, line)) run.stdout_text += line + "\n";
  return run;
}

bool have_cli() { return std::getenv("IDBOUNDS_BIN") != nullptr; }

}  // namespace

TEST_CASE("channel json round trip") {
  std::string path = write_temp("bsc.json", R"({
    "input_labels": ["0", "1"],
    "output_labels": ["0", "1"],
    "rows": [[0.9, 0.1], [0.1, 0.9]]
  })");
  io::LabeledChannel lc = io::load_channel(path);
  CHECK(lc.channel.input_size() == 2);
  CHECK(lc.channel(0, 1) == doctest::Approx(0.1));
  CHECK(lc.input_labels[1] == "1");
  CHECK(lc.hash.size() == 16);

  Json back = io::channel_json(lc);
  io::LabeledChannel again = io::parse_channel_text(back.dump(), "roundtrip");
  CHECK(again.channel(1, 0) == doctest::Approx(lc.channel(1, 0)));
}

TEST_CASE("channel csv and malformed inputs") {
  io::LabeledChannel lc =
      io::parse_channel_text("0.9, 0.1\n0.1, 0.9\n", "inline.csv");
  CHECK(lc.channel(0, 0) == doctest::Approx(0.9));

  CHECK_THROWS_WITH_AS(io::parse_channel_text("0.9, 0.1\n0.4, 0.4\n", "bad.csv"),
                       "row 1 not stochastic", ValidationError);
  CHECK_THROWS_AS(io::parse_channel_text("{\"rows\": [[0.5, 0.5], [0.8, 0.1]]}", "bad.json"),
                  ValidationError);
  CHECK_THROWS_AS(io::load_channel("/nonexistent/file.json"), ValidationError);
}

TEST_CASE("named channels") {
  CHECK(io::load_channel("bsc:0.25").channel(0, 1) == doctest::Approx(0.25));
  CHECK(io::load_channel("bec:0.5").channel.output_size() == 3);
  CHECK(io::load_channel("identity:4").channel(2, 2) == doctest::Approx(1.0));
  io::LabeledChannel flat = io::load_channel("useless:2x5");
  CHECK(flat.channel.input_size() == 2);
  CHECK(flat.channel(1, 3) == doctest::Approx(0.2));
  CHECK_THROWS_AS(io::load_channel("unknown:1"), ValidationError);
  CHECK_THROWS_AS(io::load_channel("bsc:nope"), ValidationError);
}

TEST_CASE("distribution loading") {
  CHECK(io::load_distribution("uniform:4")[2] == doctest::Approx(0.25));
  CHECK(io::load_distribution("point:3:1")[1] == doctest::Approx(1.0));
  std::string arr = write_temp("dist.json", "[0.3, 0.7]");
  CHECK(io::load_distribution(arr)[1] == doctest::Approx(0.7));
  std::string obj = write_temp("dist2.json", R"({"probs": [0.25, 0.75]})");
  CHECK(io::load_distribution(obj)[0] == doctest::Approx(0.25));
  std::string csv = write_temp("dist.csv", "0.5, 0.25, 0.25");
  CHECK(io::load_distribution(csv).size() == 3);
}

TEST_CASE("idcode file format") {
  std::string path = write_temp("code.json", R"({
    "encoders": [[1.0, 0.0], [0.0, 1.0]],
    "acceptors": [[0], [1]]
  })");
  IDCode code = io::load_idcode(path);
  CHECK(code.size() == 2);
  CHECK(code.acceptors[1][0] == 1);
  CHECK_THROWS_AS(io::parse_idcode_text(R"({"encoders": [[1.0, 0.0]], "acceptors": []})"),
                  ValidationError);
}

TEST_CASE("csv flattening quotes nested content") {
  Json j = {{"a", 1.5}, {"b", {{"c", "text"}}}, {"d", {1, 2}}};
  std::string csv = io::to_csv(j);
  CHECK(csv.find("a,b.c,d") != std::string::npos);
  CHECK(csv.find("\"text\"") != std::string::npos);
  CHECK(csv.find("\"[1,2]\"") != std::string::npos);
}

TEST_CASE("cli capacity report with manifest round trip") {
  if (!have_cli()) return;
  CliRun run = run_cli("capacity --channel bsc:0.1");
  REQUIRE(run.exit_code == 0);
  Json rep = Json::parse(run.stdout_text);
  CHECK(rep.at("result").at("capacity_nats").get<double>() ==
        doctest::Approx(0.368064).epsilon(1e-5));
  // the manifest re-validates: fields present and internally consistent
  const Json& man = rep.at("manifest");
  CHECK(man.at("generator") == kGeneratorName);
  CHECK(man.at("tool") == "idbounds");
  CHECK(man.at("command_line").get<std::string>().find("capacity") != std::string::npos);
  CHECK(man.at("inputs").at("channel").at("hash").get<std::string>().size() == 16);
  CHECK(man.at("tolerances").at("capacity").get<double>() == doctest::Approx(1e-8));
}

TEST_CASE("cli thm1 frozen example") {
  if (!have_cli()) return;
  CliRun run = run_cli("thm1 --channel bsc:0.1 --q uniform:2 --gamma 0 --m 10000");
  REQUIRE(run.exit_code == 0);
  Json rep = Json::parse(run.stdout_text);
  CHECK(rep.at("result").at("lower_bound_on_eps_plus_delta").get<double>() ==
        doctest::Approx(0.09).epsilon(1e-9));
}

TEST_CASE("cli validation failures exit with code 2") {
  if (!have_cli()) return;
  std::string bad = write_temp("bad_channel.csv", "0.5,0.5\n0.4,0.4\n");
  CliRun run = run_cli("capacity --channel " + bad);
  CHECK(run.exit_code == 2);

  CliRun regime = run_cli("idcode search --channel bsc:0.1 --eps 0.7 --delta 0.4");
  CHECK(regime.exit_code == 2);
}

TEST_CASE("cli unknown flags exit with code 64") {
  if (!have_cli()) return;
  CliRun run = run_cli("capacity --no-such-flag 3");
  CHECK(run.exit_code == 64);
  CliRun none = run_cli("");
  CHECK(none.exit_code == 64);
}

TEST_CASE("cli reports are bit-identical across reruns") {
  if (!have_cli()) return;
  CliRun a = run_cli("softcover --channel bsc:0.1 --input uniform:2 --q uniform:2 "
                     "--gamma 0 --m 25 --trials 200 --seed 42");
  CliRun b = run_cli("softcover --channel bsc:0.1 --input uniform:2 --q uniform:2 "
                     "--gamma 0 --m 25 --trials 200 --seed 42");
  REQUIRE(a.exit_code == 0);
  Json ja = Json::parse(a.stdout_text), jb = Json::parse(b.stdout_text);
  CHECK(ja.at("result") == jb.at("result"));

  // seeds change the numbers
  CliRun c = run_cli("softcover --channel bsc:0.1 --input uniform:2 --q uniform:2 "
                     "--gamma 0 --m 25 --trials 200 --seed 43");
  Json jc = Json::parse(c.stdout_text);
  CHECK(ja.at("result").at("empirical_mean") != jc.at("result").at("empirical_mean"));
}

TEST_CASE("cli csv sweep table") {
  if (!have_cli()) return;
  CliRun run = run_cli("--format csv fbl --channel bsc:0.1 --n 8,16 --eps 0.2 --delta 0 "
                       "--eta 0.2 --side converse");
  REQUIRE(run.exit_code == 0);
  CHECK(run.stdout_text.rfind("n,bound,main_term,slack,seed", 0) == 0);
  int lines = 0;
  for (char ch : run.stdout_text)
    if (ch == '\n') ++lines;
  CHECK(lines == 3);
}

TEST_CASE("cli spectrum dp/mc parity") {
  if (!have_cli()) return;
  CliRun dp = run_cli("spectrum --channel bsc:0.2 --input uniform:2 --q uniform:2 --n 12 "
                      "--mode dp");
  CliRun mc = run_cli("spectrum --channel bsc:0.2 --input uniform:2 --q uniform:2 --n 12 "
                      "--mode mc --samples 50000 --seed 9");
  REQUIRE(dp.exit_code == 0);
  REQUIRE(mc.exit_code == 0);
  Json jdp = Json::parse(dp.stdout_text), jmc = Json::parse(mc.stdout_text);
  CHECK(jdp.at("result").at("mean").get<double>() ==
        doctest::Approx(jmc.at("result").at("mean").get<double>()).epsilon(0.05));
}

TEST_SUITE_END();
