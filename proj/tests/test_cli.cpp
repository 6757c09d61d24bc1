#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "phasebind/dataset_io.hpp"
#include "phasebind/model_io.hpp"
#include "phasebind/trajectory_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kBase = fs::temp_directory_path() / "phasebind_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(PHASEBIND_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("command line pipeline end to end") {
  fs::remove_all(kBase);
  fs::create_directories(kBase);
  const std::string data_dir = (kBase / "data").string();
  const std::string model_dir = (kBase / "model").string();
  const std::string states_dir = (kBase / "states").string();

  // --- dataset generation ---
  REQUIRE(run("--seed 5 --out-dir " + data_dir +
              " gen-data --kind bars --side 12 --bars 3 --count 4 --name images") == 0);
  REQUIRE(fs::exists(kBase / "data" / "images.pbimg"));
  REQUIRE(fs::exists(kBase / "data" / "images.truth"));
  const auto items = phasebind::load_labeled((kBase / "data" / "images.pbimg").string(),
                                             (kBase / "data" / "images.truth").string());
  REQUIRE(items.size() == 4);
  CHECK(items[0].image.width == 12);
  CHECK(items[0].truth.object_count == 6);
  const std::string manifest = slurp(kBase / "data" / "manifest.txt");
  CHECK(manifest.find("command gen-data") != std::string::npos);
  CHECK(manifest.find("seed 5") != std::string::npos);
  CHECK(manifest.find("output images.pbimg") != std::string::npos);

  SUBCASE("dataset generation is reproducible across runs") {
    const std::string again = (kBase / "data2").string();
    REQUIRE(run("--seed 5 --out-dir " + again +
                " gen-data --kind bars --side 12 --bars 3 --count 4 --name images") == 0);
    CHECK(slurp(kBase / "data" / "images.pbimg") == slurp(kBase / "data2" / "images.pbimg"));
    CHECK(slurp(kBase / "data" / "images.truth") == slurp(kBase / "data2" / "images.truth"));
  }

  // --- training ---
  REQUIRE(run("--seed 1 --out-dir " + model_dir + " train --data " + data_dir +
              "/images.pbimg --layers 7:2 --epochs 2 --batch 2 --name model") == 0);
  REQUIRE(fs::exists(kBase / "model" / "model.pbmodel"));
  const auto model = phasebind::load_model((kBase / "model" / "model.pbmodel").string());
  REQUIRE(model.layer_count() == 1);
  CHECK(model.visible_units() == 144);
  CHECK(model.top_units() == 72);  // 6x6x2 from a 7x7 field on 12x12
  const std::string train_log = slurp(kBase / "model" / "train.log");
  CHECK(train_log.find("layer=1 nv=144 nh=72") != std::string::npos);
  CHECK(train_log.find("epoch=1 ") != std::string::npos);
  CHECK(train_log.find("epoch=2 ") != std::string::npos);

  // --- inference ---
  REQUIRE(run("--seed 3 --out-dir " + states_dir + " synch --model " + model_dir +
              "/model.pbmodel --data " + data_dir + "/images.pbimg --iters 3 --count 2") == 0);
  REQUIRE(fs::exists(kBase / "states" / "state_0.pbtraj"));
  REQUIRE(fs::exists(kBase / "states" / "state_1.pbtraj"));
  CHECK(!fs::exists(kBase / "states" / "state_2.pbtraj"));  // --count 2
  const auto traj = phasebind::load_trajectory((kBase / "states" / "state_0.pbtraj").string());
  REQUIRE(traj.trajectory.size() == 1);  // final state only without --traj-stride
  REQUIRE(traj.trajectory[0].layers.size() == 2);
  CHECK(traj.trajectory[0].layers[0].size() == 144);
  CHECK(traj.trajectory[0].layers[1].size() == 72);
  CHECK(fs::exists(kBase / "states" / "phase_0_l0.ppm"));
  CHECK(fs::exists(kBase / "states" / "phase_0_l1.ppm"));
  CHECK(fs::exists(kBase / "states" / "hist_0.ppm"));
  CHECK(slurp(kBase / "states" / "hist_0.csv").rfind("bin_center,count\n", 0) == 0);
  CHECK(slurp(kBase / "states" / "phase_0_l0.ppm").rfind("P6\n", 0) == 0);

  SUBCASE("inference artifacts are byte-stable across runs") {
    const std::string again = (kBase / "states2").string();
    REQUIRE(run("--seed 3 --out-dir " + again + " synch --model " + model_dir +
                "/model.pbmodel --data " + data_dir + "/images.pbimg --iters 3 --count 2") == 0);
    CHECK(slurp(kBase / "states" / "state_1.pbtraj") == slurp(kBase / "states2" / "state_1.pbtraj"));
    CHECK(slurp(kBase / "states" / "phase_1_l0.ppm") == slurp(kBase / "states2" / "phase_1_l0.ppm"));
  }

  SUBCASE("trajectory recording switches on with --traj-stride") {
    const std::string again = (kBase / "states3").string();
    REQUIRE(run("--seed 3 --out-dir " + again + " synch --model " + model_dir +
                "/model.pbmodel --data " + data_dir +
                "/images.pbimg --iters 4 --count 1 --traj-stride 2") == 0);
    const auto full = phasebind::load_trajectory((kBase / "states3" / "traj_0.pbtraj").string());
    CHECK(full.trajectory.size() == 3);  // initial, sweep 2, sweep 4
  }

  // --- segmentation ---
  REQUIRE(run("--seed 7 --out-dir " + (kBase / "seg").string() + " segment --states " +
              states_dir + " --k 3") == 0);
  CHECK(slurp(kBase / "seg" / "labels_0.ppm").rfind("P6\n", 0) == 0);
  CHECK(fs::exists(kBase / "seg" / "labels_1.ppm"));

  // --- decoding ---
  REQUIRE(run("--out-dir " + (kBase / "dec").string() + " decode --model " + model_dir +
              "/model.pbmodel --states " + states_dir) == 0);
  CHECK(fs::exists(kBase / "dec" / "decode_0.txt"));
  CHECK(fs::exists(kBase / "dec" / "decode_1.txt"));

  // --- metrics ---
  REQUIRE(run("--out-dir " + (kBase / "met").string() + " metrics --states " + states_dir +
              " --truth " + data_dir + "/images.truth") == 0);
  const std::string metrics = slurp(kBase / "met" / "metrics.csv");
  CHECK(metrics.rfind("image_id,object_id,R,mean_phase,n_pixels\n", 0) == 0);
  CHECK(count_lines(metrics) == 1 + 2 * 6);  // two images, six bars each
  const std::string peaks = slurp(kBase / "met" / "peaks.csv");
  CHECK(peaks.rfind("image_id,peak_count\n", 0) == 0);
  CHECK(count_lines(peaks) == 3);
  const std::string summary = slurp(kBase / "met" / "summary.txt");
  CHECK(summary.find("images 2\n") != std::string::npos);
  CHECK(summary.find("median_R ") != std::string::npos);
  CHECK(summary.find("multi_peak_fraction ") != std::string::npos);
}

TEST_CASE("plot-response emits the response table") {
  const fs::path dir = kBase / "resp";
  fs::remove_all(dir);
  REQUIRE(run("--out-dir " + dir.string() + " plot-response --points 19") == 0);
  const std::string csv = slurp(dir / "response.csv");
  CHECK(csv.rfind("delta_phi,mixed,sync_only\n", 0) == 0);
  CHECK(count_lines(csv) == 20);
  CHECK(csv.find("\n0,2,2\n") != std::string::npos);  // aligned inputs at unit weight and rate
  CHECK(slurp(dir / "response.ppm").rfind("P6\n", 0) == 0);
}

TEST_CASE("bad invocations exit nonzero") {
  CHECK(run("") != 0);                                  // a subcommand is required
  CHECK(run("frobnicate") != 0);
  CHECK(run("gen-data --kind nope --count 1") != 0);    // unknown dataset kind
  CHECK(run("train --layers 7:2") != 0);                // --data is required
  CHECK(run("--out-dir " + (kBase / "err").string() + " synch --model " + (kBase / "err").string() +
            "/missing.pbmodel --data also-missing.pbimg") != 0);
}
