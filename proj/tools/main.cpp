// phasebind CLI: dataset generation, training, complex-valued inference and
// phase readout, with run manifests for reproducibility.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "phasebind/dataset_io.hpp"
#include "phasebind/datasets.hpp"
#include "phasebind/hash.hpp"
#include "phasebind/idx.hpp"
#include "phasebind/model_io.hpp"
#include "phasebind/parallel.hpp"
#include "phasebind/rbm.hpp"
#include "phasebind/readout.hpp"
#include "phasebind/render.hpp"
#include "phasebind/synchrony.hpp"
#include "phasebind/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace phasebind;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string mode = "det";
  int threads = 1;

  ActivationMode activation_mode() const {
    return mode == "stoch" ? ActivationMode::stochastic : ActivationMode::deterministic;
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(fnv1a64(buf.str())));
  return out;
}

/// Collects everything needed to replay a run: command, global options,
/// command options, and a content hash per input file.
class Manifest {
 public:
  Manifest(const GlobalOpts& g, const std::string& command) {
    lines_.push_back("command " + command);
    lines_.push_back("seed " + std::to_string(g.seed));
    lines_.push_back("mode " + g.mode);
    lines_.push_back("threads " + std::to_string(g.threads));
  }

  void option(const std::string& key, const std::string& value) {
    lines_.push_back("option " + key + " " + value);
  }
  void option(const std::string& key, double value) { option(key, fmt(value)); }
  void option(const std::string& key, int value) { option(key, std::to_string(value)); }
  void option(const std::string& key, std::uint64_t value) { option(key, std::to_string(value)); }

  void input(const std::string& path) {
    lines_.push_back("input " + path + " fnv1a64=" + file_hash_hex(path));
  }
  void output(const std::string& name) { lines_.push_back("output " + name); }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    for (const auto& line : lines_) out << line << '\n';
  }

 private:
  std::vector<std::string> lines_;
};

fs::path ensure_out_dir(const GlobalOpts& g) {
  fs::path dir(g.out_dir);
  fs::create_directories(dir);
  return dir;
}

MatrixX<float> to_matrix(const std::vector<BinaryImage>& images) {
  if (images.empty()) throw std::runtime_error("dataset is empty");
  const int n = images.front().size();
  MatrixX<float> m(n, static_cast<Eigen::Index>(images.size()));
  for (std::size_t c = 0; c < images.size(); ++c) {
    if (images[c].size() != n) throw std::runtime_error("dataset images differ in size");
    m.col(static_cast<Eigen::Index>(c)) = images[c].to_vector<float>();
  }
  return m;
}

/// `rf:channels` pairs chained from the data grid; rf 0 means a fully
/// connected layer with `channels` hidden units.
std::vector<LayerGeometry> parse_layers(const std::string& text, int in_h, int in_w) {
  std::vector<LayerGeometry> geoms;
  int h = in_h, w = in_w, c = 1;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("--layers expects rf:channels pairs, got '" + item + "'");
    const int rf = std::stoi(item.substr(0, colon));
    const int ch = std::stoi(item.substr(colon + 1));
    if (rf == 0) {
      geoms.push_back(LayerGeometry::fully_connected(h * w * c, ch));
      h = ch;
      w = 1;
      c = 1;
    } else {
      geoms.push_back(LayerGeometry::convolutional(h, w, c, rf, ch));
      h = geoms.back().hid_h;
      w = geoms.back().hid_w;
      c = geoms.back().hid_c;
    }
  }
  if (geoms.empty()) throw std::runtime_error("--layers is empty");
  return geoms;
}

std::vector<std::pair<int, fs::path>> list_state_files(const std::string& dir,
                                                       const std::string& prefix) {
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= prefix.size() + 7 || name.rfind(prefix, 0) != 0 ||
        name.substr(name.size() - 7) != ".pbtraj")
      continue;
    const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - 7);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) continue;
    files.emplace_back(std::stoi(digits), entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("no " + prefix + "<index>.pbtraj files found in " + dir);
  return files;
}

int square_side(int n) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (side * side != n)
    throw std::runtime_error("layer size " + std::to_string(n) +
                             " is not square; pass --width/--height");
  return side;
}

void render_state_layers(const DbmModel<float>& model, const NetworkState<float>& state,
                         const fs::path& dir, int index, double off_threshold) {
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const LayerGeometry& g = model.layers[l == 0 ? 0 : l - 1].geometry;
    const int gh = l == 0 ? g.in_h : g.hid_h;
    const int gw = l == 0 ? g.in_w : g.hid_w;
    const int gc = l == 0 ? g.in_c : g.hid_c;
    const RgbImage img = render_phase_image(state.layers[l], gh, gw, gc, off_threshold);
    write_ppm((dir / ("phase_" + std::to_string(index) + "_l" + std::to_string(l) + ".ppm"))
                  .string(),
              img);
  }
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataOpts {
  std::string kind;
  int count = 100;
  int side = 0;
  int bars = 6;
  double p_digit = 0.8;
  double p_shape = 0.8;
  std::string mnist;
  std::string name = "images";
};

void run_gen_data(const GlobalOpts& g, const GenDataOpts& o) {
  DatasetSpec spec;
  spec.kind = dataset_kind_from_string(o.kind);
  spec.side = o.side;
  spec.count = o.count;
  spec.seed = g.seed;

  Manifest man(g, "gen-data");
  man.option("kind", o.kind);
  man.option("count", o.count);
  man.option("side", o.side);
  man.option("bars", o.bars);
  man.option("name", o.name);

  std::vector<LabeledImage> items;
  if (spec.kind == DatasetKind::mnist_plus_shape) {
    if (o.mnist.empty())
      throw std::runtime_error("gen-data --kind mnist_plus_shape needs --mnist <pbimg>");
    man.option("p-digit", o.p_digit);
    man.option("p-shape", o.p_shape);
    man.input(o.mnist);
    const std::vector<BinaryImage> mnist = load_images(o.mnist);
    items = gen_mnist_plus_shape(spec, mnist, o.p_digit, o.p_shape);
  } else {
    items = generate_dataset(spec, {}, o.bars);
  }

  const fs::path dir = ensure_out_dir(g);
  save_labeled((dir / (o.name + ".pbimg")).string(), (dir / (o.name + ".truth")).string(), items);
  man.output(o.name + ".pbimg");
  man.output(o.name + ".truth");
  man.write(dir);
  std::cout << "wrote " << items.size() << " images to " << (dir / (o.name + ".pbimg")).string()
            << "\n";
}

// ---------------------------------------------------------------------------
// fetch-mnist (local IDX ingestion; this tool never touches the network)

struct FetchMnistOpts {
  std::string images;
  std::string labels;
  double threshold = 0.5;
  int limit = 0;
  std::string name = "mnist";
};

void run_fetch_mnist(const GlobalOpts& g, const FetchMnistOpts& o) {
  Manifest man(g, "fetch-mnist");
  man.option("threshold", o.threshold);
  man.option("limit", o.limit);
  man.option("name", o.name);
  man.input(o.images);

  std::vector<GrayImage> gray = read_idx_images(o.images);
  std::vector<std::uint8_t> labels;
  if (!o.labels.empty()) {
    man.input(o.labels);
    labels = read_idx_labels(o.labels);
    if (labels.size() != gray.size())
      throw std::runtime_error("image/label counts differ");
  }
  if (o.limit > 0 && static_cast<std::size_t>(o.limit) < gray.size()) {
    gray.resize(static_cast<std::size_t>(o.limit));
    if (!labels.empty()) labels.resize(static_cast<std::size_t>(o.limit));
  }

  const fs::path dir = ensure_out_dir(g);
  save_images((dir / (o.name + ".pbimg")).string(), binarize(gray, o.threshold));
  man.output(o.name + ".pbimg");
  if (!labels.empty()) {
    std::ofstream out(dir / (o.name + ".labels"));
    for (std::uint8_t l : labels) out << static_cast<int>(l) << '\n';
    man.output(o.name + ".labels");
  }
  man.write(dir);
  std::cout << "converted " << gray.size() << " images\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string data;
  std::string arch;
  std::string layers;
  std::string algo = "cd";
  int gibbs_steps = 1;
  double lr = 0.1;
  double momentum = 0.5;
  double weight_decay = 1e-4;
  int epochs = 60;
  int batch = 100;
  double lr_decay = 1.0;
  int chains = 100;
  std::string name = "model";
};

void run_train(const GlobalOpts& g, const TrainOpts& o) {
  Manifest man(g, "train");
  man.input(o.data);
  man.option("algo", o.algo);
  man.option("gibbs-steps", o.gibbs_steps);
  man.option("lr", o.lr);
  man.option("momentum", o.momentum);
  man.option("weight-decay", o.weight_decay);
  man.option("epochs", o.epochs);
  man.option("batch", o.batch);
  man.option("lr-decay", o.lr_decay);
  man.option("chains", o.chains);
  man.option("name", o.name);

  const std::vector<BinaryImage> images = load_images(o.data);
  const MatrixX<float> data = to_matrix(images);

  std::vector<LayerGeometry> geoms;
  if (!o.arch.empty()) {
    man.option("arch", o.arch);
    geoms = architecture_for(dataset_kind_from_string(o.arch));
  } else if (!o.layers.empty()) {
    man.option("layers", o.layers);
    geoms = parse_layers(o.layers, images.front().height, images.front().width);
  } else {
    throw std::runtime_error("train needs --arch <kind> or --layers <rf:channels,...>");
  }
  if (geoms.front().visible_units() != data.rows())
    throw std::runtime_error("architecture expects " +
                             std::to_string(geoms.front().visible_units()) +
                             " visible units but images have " + std::to_string(data.rows()));

  TrainConfig cfg;
  if (o.algo == "cd")
    cfg.algorithm = TrainAlgorithm::cd;
  else if (o.algo == "pcd")
    cfg.algorithm = TrainAlgorithm::pcd;
  else
    throw std::runtime_error("--algo must be cd or pcd");
  cfg.gibbs_steps = o.gibbs_steps;
  cfg.learning_rate = o.lr;
  cfg.momentum = o.momentum;
  cfg.weight_decay = o.weight_decay;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.lr_decay = o.lr_decay;
  cfg.chain_count = o.chains;
  cfg.seed = g.seed;

  const fs::path dir = ensure_out_dir(g);
  std::ofstream log(dir / "train.log");
  std::ostringstream tee;
  const DbmModel<float> model = train_stack(data, geoms, {cfg}, &tee);
  log << tee.str();
  std::cout << tee.str();

  save_model(model, (dir / (o.name + ".pbmodel")).string());
  man.output(o.name + ".pbmodel");
  man.output("train.log");
  man.write(dir);
  std::cout << "saved " << (dir / (o.name + ".pbmodel")).string() << "\n";
}

// ---------------------------------------------------------------------------
// sample

struct SampleOpts {
  std::string model;
  int steps = 100;
  int stride = 10;
  std::string name = "samples";
};

void run_sample(const GlobalOpts& g, const SampleOpts& o) {
  Manifest man(g, "sample");
  man.input(o.model);
  man.option("steps", o.steps);
  man.option("stride", o.stride);
  man.option("name", o.name);

  const DbmModel<float> model = load_model(o.model);
  const LayerGeometry& front = model.layers.front().geometry;
  if (front.in_c != 1) throw std::runtime_error("sample: bottom layer is not a flat image");
  Rng rng(g.seed);
  const SampleRun<float> run = sample_model(model, o.steps, o.stride, rng);

  const fs::path dir = ensure_out_dir(g);
  save_images((dir / (o.name + ".pbimg")).string(), run.frames);
  man.output(o.name + ".pbimg");
  for (std::size_t j = 0; j < run.means.size(); ++j) {
    const std::string file = o.name + "_mean_" + std::to_string(j) + ".ppm";
    write_ppm((dir / file).string(), render_gray(run.means[j], front.in_h, front.in_w));
    man.output(file);
  }
  man.write(dir);
  std::cout << "recorded " << run.frames.size() << " frames\n";
}

// ---------------------------------------------------------------------------
// synch

struct SynchOpts {
  std::string model;
  std::string data;
  int iters = 100;
  int traj_stride = 0;  // 0 = final state only
  int start = 0;
  int count = 0;  // 0 = all
  int bins = 16;
  double sync_mix = kDefaultSyncMix;
  double off_threshold = kOffThreshold;
};

void run_synch(const GlobalOpts& g, const SynchOpts& o) {
  Manifest man(g, "synch");
  man.input(o.model);
  man.input(o.data);
  man.option("iters", o.iters);
  man.option("traj-stride", o.traj_stride);
  man.option("start", o.start);
  man.option("count", o.count);
  man.option("bins", o.bins);
  man.option("sync-mix", o.sync_mix);
  man.option("off-threshold", o.off_threshold);

  const DbmModel<float> model = load_model(o.model);
  const std::vector<BinaryImage> images = load_images(o.data);
  const int total = static_cast<int>(images.size());
  if (o.start < 0 || o.start >= total) throw std::runtime_error("--start out of range");
  const int n = o.count > 0 ? std::min(o.count, total - o.start) : total - o.start;

  InferenceConfig cfg;
  cfg.iterations = o.iters;
  cfg.mode = g.activation_mode();
  cfg.seed = g.seed;
  cfg.record_trajectory = o.traj_stride > 0;
  cfg.record_stride = std::max(1, o.traj_stride);
  cfg.sync_mix = o.sync_mix;

  const fs::path dir = ensure_out_dir(g);
  const std::string model_name = fs::path(o.model).filename().string();
  parallel_for(n, g.threads, [&](int i) {
    const int idx = o.start + i;
    const InferenceResult<float> res =
        run_inference(model, images[static_cast<std::size_t>(idx)], cfg,
                      static_cast<std::uint64_t>(idx));
    save_trajectory((dir / ("state_" + std::to_string(idx) + ".pbtraj")).string(), model_name,
                    cfg, {res.state});
    if (cfg.record_trajectory)
      save_trajectory((dir / ("traj_" + std::to_string(idx) + ".pbtraj")).string(), model_name,
                      cfg, res.trajectory);
    render_state_layers(model, res.state, dir, idx, o.off_threshold);
    const PhaseHistogram hist = phase_histogram(res.state.layers[0], o.bins, o.off_threshold);
    std::ofstream csv(dir / ("hist_" + std::to_string(idx) + ".csv"));
    write_histogram_csv(csv, hist);
    write_ppm((dir / ("hist_" + std::to_string(idx) + ".ppm")).string(),
              render_histogram(hist));
  });
  for (int idx = o.start; idx < o.start + n; ++idx) {
    man.output("state_" + std::to_string(idx) + ".pbtraj");
    if (cfg.record_trajectory) man.output("traj_" + std::to_string(idx) + ".pbtraj");
  }
  man.write(dir);
  std::cout << "ran inference on " << n << " images\n";
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOpts {
  std::string states;
  int k = 0;
  int width = 0;
  int height = 0;
  double off_threshold = kOffThreshold;
};

void run_segment(const GlobalOpts& g, const SegmentOpts& o) {
  Manifest man(g, "segment");
  man.option("states", o.states);
  man.option("k", o.k);
  man.option("off-threshold", o.off_threshold);

  const auto files = list_state_files(o.states, "state_");
  const fs::path dir = ensure_out_dir(g);
  parallel_for(static_cast<int>(files.size()), g.threads, [&](int i) {
    const auto& [idx, path] = files[static_cast<std::size_t>(i)];
    const TrajectoryFile traj = load_trajectory(path.string());
    const NetworkState<float>& state = traj.trajectory.back();
    const int nv = state.layers.at(0).size();
    const int w = o.width > 0 ? o.width : square_side(nv);
    const int h = o.height > 0 ? o.height : nv / w;
    const Segmentation seg = segment_visible(state, w, h, o.k, g.seed, o.off_threshold);
    write_ppm((dir / ("labels_" + std::to_string(idx) + ".ppm")).string(),
              render_label_image(seg));
  });
  for (const auto& [idx, path] : files) man.output("labels_" + std::to_string(idx) + ".ppm");
  man.write(dir);
  std::cout << "segmented " << files.size() << " states\n";
}

// ---------------------------------------------------------------------------
// decode

struct DecodeOpts {
  std::string model;
  std::string states;
  int bins = 16;
  double window = 0.0;  // 0 = one bin width
  double off_threshold = kOffThreshold;
};

void run_decode(const GlobalOpts& g, const DecodeOpts& o) {
  Manifest man(g, "decode");
  man.input(o.model);
  man.option("states", o.states);
  man.option("bins", o.bins);
  man.option("off-threshold", o.off_threshold);
  const double window = o.window > 0 ? o.window : 2.0 * kPi / o.bins;
  man.option("window", window);

  const DbmModel<float> model = load_model(o.model);
  const LayerGeometry& front = model.layers.front().geometry;
  if (front.in_c != 1) throw std::runtime_error("decode: bottom layer is not a flat image");
  const auto files = list_state_files(o.states, "state_");
  const fs::path dir = ensure_out_dir(g);
  parallel_for(static_cast<int>(files.size()), g.threads, [&](int i) {
    const auto& [idx, path] = files[static_cast<std::size_t>(i)];
    const TrajectoryFile traj = load_trajectory(path.string());
    const ComplexLayerState<float>& top = traj.trajectory.back().layers.back();
    const PeakMasks pm = histogram_peak_masks(top, o.bins, window, o.off_threshold);
    std::ofstream log(dir / ("decode_" + std::to_string(idx) + ".txt"));
    for (std::size_t p = 0; p < pm.masks.size(); ++p) {
      const VectorX<float> vis = decode_cluster(model, pm.masks[p], top);
      const std::string file =
          "decode_" + std::to_string(idx) + "_p" + std::to_string(p) + ".ppm";
      write_ppm((dir / file).string(), render_gray(vis, front.in_h, front.in_w));
      int units = 0;
      for (std::uint8_t b : pm.masks[p]) units += b;
      log << "peak " << p << " phase " << fmt(pm.peak_phases[p]) << " units " << units << "\n";
    }
  });
  man.write(dir);
  std::cout << "decoded " << files.size() << " states\n";
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsOpts {
  std::string states;
  std::string truth;
  int bins = 16;
  double off_threshold = kOffThreshold;
};

void run_metrics(const GlobalOpts& g, const MetricsOpts& o) {
  Manifest man(g, "metrics");
  man.option("states", o.states);
  man.input(o.truth);
  man.option("bins", o.bins);
  man.option("off-threshold", o.off_threshold);

  const std::vector<GroundTruth> truths = load_truth(o.truth);
  const auto files = list_state_files(o.states, "state_");
  std::vector<std::string> rows(files.size());
  std::vector<CoherenceMetrics> all(files.size());
  parallel_for(static_cast<int>(files.size()), g.threads, [&](int i) {
    const auto& [idx, path] = files[static_cast<std::size_t>(i)];
    const TrajectoryFile traj = load_trajectory(path.string());
    const CoherenceMetrics m = coherence_metrics(
        traj.trajectory.back(), truths.at(static_cast<std::size_t>(idx)), o.bins,
        o.off_threshold);
    std::ostringstream os;
    append_metrics_csv(os, idx, m);
    rows[static_cast<std::size_t>(i)] = os.str();
    all[static_cast<std::size_t>(i)] = m;
  });

  const fs::path dir = ensure_out_dir(g);
  std::ofstream csv(dir / "metrics.csv");
  csv << "image_id,object_id,R,mean_phase,n_pixels\n";
  for (const auto& row : rows) csv << row;
  man.output("metrics.csv");
  std::ofstream peaks(dir / "peaks.csv");
  peaks << "image_id,peak_count\n";
  for (std::size_t i = 0; i < files.size(); ++i)
    peaks << files[i].first << ',' << all[i].peak_count << '\n';
  man.output("peaks.csv");

  std::vector<double> resultants;
  int multi_peak = 0;
  for (const auto& m : all) {
    for (const auto& obj : m.objects)
      if (obj.n_pixels > 0) resultants.push_back(obj.resultant);
    if (m.peak_count >= 2) ++multi_peak;
  }
  double median_r = 0.0;
  if (!resultants.empty()) {
    std::sort(resultants.begin(), resultants.end());
    const std::size_t mid = resultants.size() / 2;
    median_r = resultants.size() % 2 ? resultants[mid]
                                     : 0.5 * (resultants[mid - 1] + resultants[mid]);
  }
  const double multi_frac = files.empty() ? 0.0 : double(multi_peak) / double(files.size());
  std::ostringstream summary;
  summary << "images " << files.size() << "\n"
          << "objects " << resultants.size() << "\n"
          << "median_R " << fmt(median_r) << "\n"
          << "multi_peak_fraction " << fmt(multi_frac) << "\n";
  std::ofstream sf(dir / "summary.txt");
  sf << summary.str();
  man.output("summary.txt");
  man.write(dir);
  std::cout << summary.str();
}

// ---------------------------------------------------------------------------
// plot-response

struct ResponseOpts {
  double w1 = 1.0, r1 = 1.0, w2 = 1.0, r2 = 1.0;
  int points = 181;
};

void run_plot_response(const GlobalOpts& g, const ResponseOpts& o) {
  Manifest man(g, "plot-response");
  man.option("w1", o.w1);
  man.option("r1", o.r1);
  man.option("w2", o.w2);
  man.option("r2", o.r2);
  man.option("points", o.points);

  const auto rows = phase_response_table(o.w1, o.w2, o.r1, o.r2, o.points);
  const fs::path dir = ensure_out_dir(g);
  std::ofstream csv(dir / "response.csv");
  write_response_csv(csv, rows);
  man.output("response.csv");

  // Simple line raster: mixed drive in red, synchrony-only in blue.
  const int width = 360, height = 240;
  RgbImage img(height, width);
  double peak = 0.0;
  for (const auto& r : rows) peak = std::max({peak, r.mixed, r.sync_only});
  if (peak <= 0) peak = 1.0;
  auto plot = [&](double x01, double y01, std::array<std::uint8_t, 3> rgb) {
    const int col = std::clamp(static_cast<int>(std::lround(x01 * (width - 1))), 0, width - 1);
    const int row =
        std::clamp(height - 1 - static_cast<int>(std::lround(y01 * (height - 1))), 0, height - 1);
    img.set(row, col, rgb);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x = double(i) / double(rows.size() - 1);
    plot(x, rows[i].mixed / peak, {255, 64, 64});
    plot(x, rows[i].sync_only / peak, {64, 64, 255});
  }
  write_ppm((dir / "response.ppm").string(), img);
  man.output("response.ppm");
  man.write(dir);
  std::cout << "wrote response table (" << rows.size() << " points)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phasebind: train Boltzmann stacks, convert them to complex-valued"
               " networks, and read out object assemblies by phase"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "global seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "run directory for artifacts and manifest")
      ->capture_default_str();
  app.add_option("--mode", g.mode, "activation mode")
      ->check(CLI::IsMember({"det", "stoch"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "worker pool size for per-image work")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset with ground truth");
  gen->fallthrough();
  auto gopt = std::make_shared<GenDataOpts>();
  gen->add_option("--kind", gopt->kind, "bars|corners|three_shapes|mnist_plus_shape")
      ->required()
      ->check(CLI::IsMember({"bars", "corners", "three_shapes", "mnist_plus_shape"}));
  gen->add_option("--count", gopt->count)->capture_default_str();
  gen->add_option("--side", gopt->side, "image side (0 = kind default)")->capture_default_str();
  gen->add_option("--bars", gopt->bars, "bars per orientation")->capture_default_str();
  gen->add_option("--p-digit", gopt->p_digit)->capture_default_str();
  gen->add_option("--p-shape", gopt->p_shape)->capture_default_str();
  gen->add_option("--mnist", gopt->mnist, "binarized digit pool (pbimg) for mnist_plus_shape");
  gen->add_option("--name", gopt->name, "output stem")->capture_default_str();
  gen->callback([&g, gopt] { run_gen_data(g, *gopt); });

  auto* fetch = app.add_subcommand(
      "fetch-mnist", "convert local IDX files to the pbimg format (no network access)");
  fetch->fallthrough();
  auto fopt = std::make_shared<FetchMnistOpts>();
  fetch->add_option("--images", fopt->images, "IDX image file")
      ->required()
      ->check(CLI::ExistingFile);
  fetch->add_option("--labels", fopt->labels, "IDX label file")->check(CLI::ExistingFile);
  fetch->add_option("--threshold", fopt->threshold, "binarization threshold in [0,1]")
      ->capture_default_str();
  fetch->add_option("--limit", fopt->limit, "keep only the first N images (0 = all)")
      ->capture_default_str();
  fetch->add_option("--name", fopt->name, "output stem")->capture_default_str();
  fetch->callback([&g, fopt] { run_fetch_mnist(g, *fopt); });

  auto* train = app.add_subcommand("train", "layer-wise training of a Boltzmann stack");
  train->fallthrough();
  auto topt = std::make_shared<TrainOpts>();
  train->add_option("--data", topt->data, "training images (pbimg)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--arch", topt->arch, "reference architecture for a dataset kind")
      ->check(CLI::IsMember({"bars", "corners", "three_shapes", "mnist_plus_shape"}));
  train->add_option("--layers", topt->layers, "custom stack as rf:channels,... (rf 0 = dense)");
  train->add_option("--algo", topt->algo, "cd|pcd")->capture_default_str();
  train->add_option("--gibbs-steps", topt->gibbs_steps)->capture_default_str();
  train->add_option("--lr", topt->lr)->capture_default_str();
  train->add_option("--momentum", topt->momentum)->capture_default_str();
  train->add_option("--weight-decay", topt->weight_decay)->capture_default_str();
  train->add_option("--epochs", topt->epochs)->capture_default_str();
  train->add_option("--batch", topt->batch)->capture_default_str();
  train->add_option("--lr-decay", topt->lr_decay, "divide lr by this after every minibatch")
      ->capture_default_str();
  train->add_option("--chains", topt->chains, "persistent chain count for pcd")
      ->capture_default_str();
  train->add_option("--name", topt->name, "model file stem")->capture_default_str();
  train->callback([&g, topt] { run_train(g, *topt); });

  auto* sample = app.add_subcommand("sample", "generate images from a trained model");
  sample->fallthrough();
  auto sopt = std::make_shared<SampleOpts>();
  sample->add_option("--model", sopt->model)->required()->check(CLI::ExistingFile);
  sample->add_option("--steps", sopt->steps)->capture_default_str();
  sample->add_option("--stride", sopt->stride)->capture_default_str();
  sample->add_option("--name", sopt->name)->capture_default_str();
  sample->callback([&g, sopt] { run_sample(g, *sopt); });

  auto* synch = app.add_subcommand(
      "synch", "complex-valued inference: clamp images, settle phases, render states");
  synch->fallthrough();
  auto yopt = std::make_shared<SynchOpts>();
  synch->add_option("--model", yopt->model)->required()->check(CLI::ExistingFile);
  synch->add_option("--data", yopt->data)->required()->check(CLI::ExistingFile);
  synch->add_option("--iters", yopt->iters)->capture_default_str();
  synch->add_option("--traj-stride", yopt->traj_stride,
                    "also record the full trajectory every N sweeps (0 = off)")
      ->capture_default_str();
  synch->add_option("--start", yopt->start, "first image index")->capture_default_str();
  synch->add_option("--count", yopt->count, "number of images (0 = all)")->capture_default_str();
  synch->add_option("--bins", yopt->bins, "histogram bins")->capture_default_str();
  synch->add_option("--sync-mix", yopt->sync_mix, "weight of the synchrony term in [0,1]")
      ->capture_default_str();
  synch->add_option("--off-threshold", yopt->off_threshold)->capture_default_str();
  synch->callback([&g, yopt] { run_synch(g, *yopt); });

  auto* segment = app.add_subcommand("segment", "k-means phase segmentation of settled states");
  segment->fallthrough();
  auto eopt = std::make_shared<SegmentOpts>();
  segment->add_option("--states", eopt->states, "directory with state_<i>.pbtraj files")
      ->required()
      ->check(CLI::ExistingDirectory);
  segment->add_option("--k", eopt->k, "cluster count (objects + background)")->required();
  segment->add_option("--width", eopt->width, "visible grid width (0 = assume square)")
      ->capture_default_str();
  segment->add_option("--height", eopt->height)->capture_default_str();
  segment->add_option("--off-threshold", eopt->off_threshold)->capture_default_str();
  segment->callback([&g, eopt] { run_segment(g, *eopt); });

  auto* decode = app.add_subcommand(
      "decode", "decode top-layer histogram-peak assemblies back to image space");
  decode->fallthrough();
  auto dopt = std::make_shared<DecodeOpts>();
  decode->add_option("--model", dopt->model)->required()->check(CLI::ExistingFile);
  decode->add_option("--states", dopt->states, "directory with state_<i>.pbtraj files")
      ->required()
      ->check(CLI::ExistingDirectory);
  decode->add_option("--bins", dopt->bins)->capture_default_str();
  decode->add_option("--window", dopt->window, "peak window in radians (0 = one bin width)")
      ->capture_default_str();
  decode->add_option("--off-threshold", dopt->off_threshold)->capture_default_str();
  decode->callback([&g, dopt] { run_decode(g, *dopt); });

  auto* metrics = app.add_subcommand(
      "metrics", "within-object coherence and histogram peaks against ground truth");
  metrics->fallthrough();
  auto mopt = std::make_shared<MetricsOpts>();
  metrics->add_option("--states", mopt->states, "directory with state_<i>.pbtraj files")
      ->required()
      ->check(CLI::ExistingDirectory);
  metrics->add_option("--truth", mopt->truth, "ground-truth sibling file")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--bins", mopt->bins)->capture_default_str();
  metrics->add_option("--off-threshold", mopt->off_threshold)->capture_default_str();
  metrics->callback([&g, mopt] { run_metrics(g, *mopt); });

  auto* resp = app.add_subcommand("plot-response",
                                  "two-input phase response curve as CSV and raster");
  resp->fallthrough();
  auto ropt = std::make_shared<ResponseOpts>();
  resp->add_option("--w1", ropt->w1)->capture_default_str();
  resp->add_option("--r1", ropt->r1)->capture_default_str();
  resp->add_option("--w2", ropt->w2)->capture_default_str();
  resp->add_option("--r2", ropt->r2)->capture_default_str();
  resp->add_option("--points", ropt->points)->capture_default_str();
  resp->callback([&g, ropt] { run_plot_response(g, *ropt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
