// sketchkit command-line tool: one binary for generating matrices, learning
// sketches, reconstructing and inspecting them, fine-tuning sketched models,
// and running the update-compression analyses.  Every artifact is stamped
// with a manifest (tool version, resolved flags, input digests) so any output
// can be reproduced from a single command line.
//
// Exit codes: 0 success, 1 runtime failure (missing/malformed files, numeric
// errors), 2 usage errors.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sketchkit/calibration.hpp"
#include "sketchkit/delta_analysis.hpp"
#include "sketchkit/error.hpp"
#include "sketchkit/finetune.hpp"
#include "sketchkit/manifest.hpp"
#include "sketchkit/mat_io.hpp"
#include "sketchkit/matrix.hpp"
#include "sketchkit/rng.hpp"
#include "sketchkit/sketch_config.hpp"
#include "sketchkit/sketch_learner.hpp"
#include "sketchkit/sketched_matrix.hpp"
#include "sketchkit/theory.hpp"
#include "sketchkit/version.hpp"

namespace {

using namespace sketchkit;

// Malformed flag values and flag combinations are usage errors (exit 2);
// everything thrown as plain sketchkit::error is a runtime failure (exit 1).
struct usage_error : error {
  using error::error;
};

// ---------------------------------------------------------------------------
// Small formatting and parsing helpers
// ---------------------------------------------------------------------------

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string with_commas(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  const std::size_t n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw usage_error(what + ": expected an unsigned integer, got '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw usage_error(what + ": value '" + text + "' is out of range");
  }
}

std::pair<std::size_t, std::size_t> parse_shape(const std::string& text) {
  const std::size_t x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw usage_error("malformed shape '" + text + "': expected ROWSxCOLS, e.g. 8x64");
  const std::uint64_t r = parse_u64(text.substr(0, x), "shape rows");
  const std::uint64_t c = parse_u64(text.substr(x + 1), "shape cols");
  if (r == 0 || c == 0) throw usage_error("malformed shape '" + text + "': dimensions must be positive");
  return {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(sep, start);
    if (end == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

// Shape lists look like "4096x4096*4,4096x11008,11008x4096*2"; the optional
// "*N" repeats one entry, and --repeat repeats the whole list.
std::vector<std::pair<std::uint64_t, std::uint64_t>> parse_shape_list(const std::string& text,
                                                                      std::uint64_t repeat) {
  if (text.empty()) throw usage_error("--shapes: empty list");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> one_pass;
  for (const std::string& token : split(text, ',')) {
    if (token.empty()) throw usage_error("--shapes: empty entry in '" + text + "'");
    std::string shape = token;
    std::uint64_t times = 1;
    const std::size_t star = token.find('*');
    if (star != std::string::npos) {
      shape = token.substr(0, star);
      times = parse_u64(token.substr(star + 1), "--shapes multiplier");
      if (times == 0) throw usage_error("--shapes: zero multiplier in '" + token + "'");
    }
    const auto [r, c] = parse_shape(shape);
    for (std::uint64_t t = 0; t < times; ++t) one_pass.emplace_back(r, c);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t rep = 0; rep < repeat; ++rep)
    out.insert(out.end(), one_pass.begin(), one_pass.end());
  return out;
}

std::vector<double> parse_ratio_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& token : split(text, ',')) {
    if (token.empty()) throw usage_error("--ratios: empty entry in '" + text + "'");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
      throw usage_error("--ratios: cannot parse '" + token + "' as a number");
    out.push_back(v);
  }
  return out;
}

// Eta grids are "start:stop:step" (inclusive endpoints) or a single value.
std::vector<double> parse_eta_grid(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  auto num = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end == s.c_str() || *end != '\0')
      throw usage_error("--eta-grid: cannot parse '" + s + "' as a number");
    return v;
  };
  std::vector<double> out;
  if (parts.size() == 1) {
    out.push_back(num(parts[0]));
  } else if (parts.size() == 3) {
    const double start = num(parts[0]), stop = num(parts[1]), step = num(parts[2]);
    if (!(step > 0)) throw usage_error("--eta-grid: step must be positive");
    if (stop < start) throw usage_error("--eta-grid: stop is below start");
    for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
  } else {
    throw usage_error("--eta-grid: expected VALUE or START:STOP:STEP, got '" + text + "'");
  }
  for (const double v : out)
    if (!(v >= 0.0 && v < 1.0))
      throw usage_error("--eta-grid: eta " + fmt_g(v) + " outside [0, 1)");
  return out;
}

int env_default_threads() {
  const char* env = std::getenv("SKETCHKIT_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 0 || v > 65536)
    throw usage_error("SKETCHKIT_THREADS must be a non-negative integer, got '" + std::string(env) +
                "'");
  return static_cast<int>(v);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write " + path);
  out << content;
  if (!out) throw error("failed while writing " + path);
}

// ---------------------------------------------------------------------------
// Calibration argument: a MAT1 path or "synth:DIST:m=N"
// ---------------------------------------------------------------------------

struct CalibArg {
  bool synthetic = false;
  std::string path;              // when a file
  CalibDist dist = CalibDist::gaussian;
  std::size_t m = 0;             // when synthetic
};

CalibArg parse_calib_arg(const std::string& text) {
  CalibArg arg;
  if (text.rfind("synth:", 0) != 0) {
    arg.path = text;
    return arg;
  }
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() != 3 || parts[2].rfind("m=", 0) != 0)
    throw usage_error("--calib: expected synth:DIST:m=N (e.g. synth:gaussian:m=256), got '" + text +
                "'");
  arg.synthetic = true;
  arg.dist = parse_calib_dist(parts[1]);
  arg.m = static_cast<std::size_t>(parse_u64(parts[2].substr(2), "--calib sample count"));
  if (arg.m == 0) throw usage_error("--calib: sample count must be positive");
  return arg;
}

// Loads or synthesizes the calibration set and records it in the manifest.
// Synthetic draws come from a stream decorrelated from `seed` (which also
// seeds the row learners) by a fixed odd offset.
CalibrationSet load_calibration(const CalibArg& arg, std::size_t want_rows, std::uint64_t seed,
                                RunManifest& man) {
  if (arg.synthetic) {
    return synth_calibration(want_rows, arg.m, seed ^ 0x9e3779b97f4a7c15ull, arg.dist);
  }
  man.add_input(arg.path);
  const Matrix x = read_mat1(arg.path);
  if (x.rows() != want_rows)
    throw error("calibration " + arg.path + " has " + std::to_string(x.rows()) +
                " rows; the weight matrix has " + std::to_string(want_rows) +
                " columns and the two must match");
  return make_calibration(x);
}

// ---------------------------------------------------------------------------
// Subcommand handlers (throw sketchkit::error on failure)
// ---------------------------------------------------------------------------

struct GenArgs {
  std::string shape, dist = "gaussian", out;
  double eta = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

void run_gen(const GenArgs& a) {
  const auto [rows, cols] = parse_shape(a.shape);
  Matrix m(rows, cols);
  if (a.dist == "gaussian") {
    Rng rng(a.seed);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_gaussian();
  } else if (a.dist == "powerlaw-spectrum") {
    if (rows != cols)
      throw error("gen: powerlaw-spectrum needs a square shape, got " + a.shape);
    Rng rng(a.seed);
    m = synth_powerlaw_matrix(rows, a.eta, rng, a.threads);
  } else {
    throw usage_error("gen: unknown distribution '" + a.dist +
                      "' (expected gaussian or powerlaw-spectrum)");
  }
  write_mat1(a.out, m, MatDtype::f64);

  RunManifest man;
  man.subcommand = "gen";
  man.add_flag("--shape", a.shape);
  man.add_flag("--dist", a.dist);
  man.add_flag("--eta", fmt_g(a.eta));
  man.add_flag("--seed", std::to_string(a.seed));
  man.add_flag("--threads", std::to_string(a.threads));
  man.add_flag("--out", a.out);
  man.write_sidecar(a.out);
  std::cout << "wrote " << a.out << " (" << m.shape_str() << " float64)\n";
}

struct SketchArgs {
  std::string input, calib, output;
  int bits = 4, gpr = 1, block = 128, threads = 1;
  double s = 3.0, damp = 0.01;
  std::uint64_t seed = 0;
};

void run_sketch(const SketchArgs& a) {
  RunManifest man;
  man.subcommand = "sketch";
  man.add_flag("--input", a.input);
  man.add_flag("--calib", a.calib);
  man.add_flag("--bits", std::to_string(a.bits));
  man.add_flag("--gpr", std::to_string(a.gpr));
  man.add_flag("--block", std::to_string(a.block));
  man.add_flag("--s", fmt_g(a.s));
  man.add_flag("--damp", fmt_g(a.damp));
  man.add_flag("--seed", std::to_string(a.seed));
  man.add_flag("--threads", std::to_string(a.threads));
  man.add_flag("--output", a.output);

  man.add_input(a.input);
  const Matrix w = read_mat1(a.input);
  const CalibrationSet calib = load_calibration(parse_calib_arg(a.calib), w.cols(), a.seed, man);

  SketchConfig cfg;
  cfg.bits = a.bits;
  cfg.gpr = a.gpr;
  cfg.block = a.block;
  cfg.exponent = a.s;
  cfg.damp = a.damp;
  cfg.seed = a.seed;
  cfg.validate(w.cols());

  const HessianFactor hf = build_hessian(calib, a.damp, a.threads);
  const SketchedMatrix sm = sketch_matrix(w, hf, cfg, a.threads);
  write_skt1(a.output, sm);
  man.write_sidecar(a.output);
  std::cout << "wrote " << a.output << " (" << w.shape_str() << ", bits=" << a.bits
            << ", gpr=" << a.gpr << ", " << with_commas(sm.sketched.size())
            << " trainable values)\n";
}

struct ReconstructArgs {
  std::string model, output;
  int threads = 1;
};

void run_reconstruct(const ReconstructArgs& a) {
  RunManifest man;
  man.subcommand = "reconstruct";
  man.add_flag("--model", a.model);
  man.add_flag("--threads", std::to_string(a.threads));
  man.add_flag("--output", a.output);
  man.add_input(a.model);
  const SketchedMatrix sm = read_skt1(a.model);
  const Matrix w = reconstruct(sm, a.threads);
  write_mat1(a.output, w, MatDtype::f64);
  man.write_sidecar(a.output);
  std::cout << "wrote " << a.output << " (" << w.shape_str() << " float64)\n";
}

struct InfoArgs {
  std::string model, shapes;
  std::uint64_t repeat = 1, model_params = 0;
  int gpr = 1, bits = 4;
};

void run_info(const InfoArgs& a) {
  if (a.model.empty() == a.shapes.empty())
    throw usage_error("info: pass exactly one of --model or --shapes");
  if (!a.model.empty()) {
    const SketchedMatrix sm = read_skt1(a.model);
    const std::uint64_t dense = static_cast<std::uint64_t>(sm.rows) * sm.cols;
    const std::uint64_t trainable = static_cast<std::uint64_t>(sm.sketched.size());
    const double dense_fp16_bytes = 2.0 * static_cast<double>(dense);
    const double sketch_bytes =
        static_cast<double>(skt1_file_size(sm.rows, sm.cols, sm.cfg.gpr, sm.cfg.bits) - 18);
    std::cout << "model: " << a.model << "\n"
              << "shape: " << sm.rows << "x" << sm.cols << "\n"
              << "bits: " << sm.cfg.bits << "\n"
              << "groups per row: " << sm.cfg.gpr << "\n"
              << "trainable parameters: " << with_commas(trainable) << "\n"
              << "dense parameters: " << with_commas(dense) << "\n"
              << "parameter compression (dense/trainable): "
              << fmt_fixed(static_cast<double>(dense) / static_cast<double>(trainable), 1)
              << "x\n"
              << "storage compression vs float16 dense: "
              << fmt_fixed(dense_fp16_bytes / sketch_bytes, 2) << "x\n";
    return;
  }
  const auto shapes = parse_shape_list(a.shapes, a.repeat == 0 ? 1 : a.repeat);
  SketchConfig cfg;
  cfg.bits = a.bits;
  cfg.gpr = a.gpr;
  const std::uint64_t trainable = count_trainable_params(shapes, cfg);
  std::uint64_t dense = 0;
  for (const auto& [r, c] : shapes) dense += r * c;
  std::cout << "layers: " << shapes.size() << "\n"
            << "bits: " << a.bits << "\n"
            << "groups per row: " << a.gpr << "\n"
            << "trainable parameters: " << with_commas(trainable) << "\n"
            << "dense parameters: " << with_commas(dense) << "\n"
            << "parameter compression (dense/trainable): "
            << fmt_fixed(static_cast<double>(dense) / static_cast<double>(trainable), 1)
            << "x\n";
  if (a.model_params > 0)
    std::cout << "parameter compression vs " << with_commas(a.model_params)
              << " model parameters: "
              << fmt_fixed(static_cast<double>(a.model_params) / static_cast<double>(trainable),
                           1)
              << "x\n";
}

struct FinetuneArgs {
  std::string model, teacher, inputs, out, trace;
  int steps = 100, threads = 1;
  double lr = 1e-2;
  std::string opt = "sgd";
};

void run_finetune(const FinetuneArgs& a) {
  RunManifest man;
  man.subcommand = "finetune";
  man.add_flag("--model", a.model);
  man.add_flag("--teacher", a.teacher);
  man.add_flag("--inputs", a.inputs);
  man.add_flag("--steps", std::to_string(a.steps));
  man.add_flag("--lr", fmt_g(a.lr));
  man.add_flag("--opt", a.opt);
  man.add_flag("--threads", std::to_string(a.threads));
  man.add_flag("--out", a.out);
  if (!a.trace.empty()) man.add_flag("--trace", a.trace);
  man.add_input(a.model);
  man.add_input(a.teacher);
  man.add_input(a.inputs);

  const SketchedMatrix sm = read_skt1(a.model);
  const Matrix teacher = read_mat1(a.teacher);
  if (teacher.rows() != sm.rows || teacher.cols() != sm.cols)
    throw error("finetune: teacher " + a.teacher + " is " + teacher.shape_str() +
                ", the model is " + std::to_string(sm.rows) + "x" + std::to_string(sm.cols));
  const Matrix x = read_mat1(a.inputs);
  if (x.rows() != sm.cols)
    throw error("finetune: inputs " + a.inputs + " have " + std::to_string(x.rows()) +
                " rows; the model has " + std::to_string(sm.cols) + " columns");

  const TrainTask task = make_task(teacher, x, a.threads);
  const TrainResult res = train(sm, task, parse_optimizer(a.opt), a.steps, a.lr, a.threads);
  write_skt1(a.out, res.model);
  man.write_sidecar(a.out);

  if (!a.trace.empty()) {
    std::string csv = man.header_text();
    csv += "step,loss\n";
    for (std::size_t t = 0; t < res.loss.size(); ++t)
      csv += std::to_string(t) + "," + fmt_g(res.loss[t]) + "\n";
    write_text_file(a.trace, csv);
  }
  std::cout << "wrote " << a.out << "\n";
  if (!res.loss.empty())
    std::cout << "loss: " << fmt_g(res.loss.front()) << " -> " << fmt_g(res.loss.back()) << " over "
              << res.loss.size() << " steps\n";
}

struct AnalyzeArgs {
  std::string base, tuned, calib, ratios, out;
  double damp = 0.01;
  std::uint64_t seed = 0;
  int threads = 1;
};

void run_analyze_delta(const AnalyzeArgs& a) {
  RunManifest man;
  man.subcommand = "analyze-delta";
  man.add_flag("--base", a.base);
  man.add_flag("--tuned", a.tuned);
  man.add_flag("--calib", a.calib);
  man.add_flag("--ratios", a.ratios);
  man.add_flag("--damp", fmt_g(a.damp));
  man.add_flag("--seed", std::to_string(a.seed));
  man.add_flag("--threads", std::to_string(a.threads));
  man.add_flag("--out", a.out);
  man.add_input(a.base);
  man.add_input(a.tuned);

  const Matrix w = read_mat1(a.base);
  const Matrix wp = read_mat1(a.tuned);
  const std::vector<double> ratios = parse_ratio_list(a.ratios);
  const CalibrationSet calib = load_calibration(parse_calib_arg(a.calib), w.cols(), a.seed, man);
  const HessianFactor hf = build_hessian(calib, a.damp, a.threads);
  const DeltaReport rep = compare_sweep(w, wp, hf, ratios, a.seed, a.threads);

  std::string csv = man.header_text();
  csv += "# matrix: " + rep.matrix_id + "\n";
  csv += "# accounting: " + rep.accounting + "\n";
  for (const SweepChoice& ch : rep.choices)
    csv += "# choice ratio=" + fmt_g(ch.ratio) + ": rank=" + std::to_string(ch.rank) +
           " bits=" + std::to_string(ch.bits) + " gpr=" + std::to_string(ch.gpr) +
           " sketch_ratio=" + fmt_g(ch.sketch_ratio) + "\n";
  csv += "ratio,lowrank_err,sketch_err\n";
  for (std::size_t i = 0; i < rep.compression_ratios.size(); ++i)
    csv += fmt_g(rep.compression_ratios[i]) + "," + fmt_g(rep.lowrank_err[i]) + "," +
           fmt_g(rep.sketch_err[i]) + "\n";
  write_text_file(a.out, csv);

  std::cout << "wrote " << a.out << "\n";
  for (std::size_t i = 0; i < rep.compression_ratios.size(); ++i)
    std::cout << "ratio " << fmt_g(rep.compression_ratios[i]) << ": lowrank "
              << fmt_g(rep.lowrank_err[i]) << ", sketch " << fmt_g(rep.sketch_err[i]) << "\n";
}

struct TheoryArgs {
  std::uint64_t n = 1024, alpha = 8, seed = 0;
  std::string eta_grid = "0:0.95:0.05";
  std::uint64_t trials = 50;
  std::string out;
  int threads = 1;
};

void run_theory(const TheoryArgs& a) {
  RunManifest man;
  man.subcommand = "theory";
  man.add_flag("--n", std::to_string(a.n));
  man.add_flag("--alpha", std::to_string(a.alpha));
  man.add_flag("--eta-grid", a.eta_grid);
  man.add_flag("--trials", std::to_string(a.trials));
  man.add_flag("--seed", std::to_string(a.seed));
  man.add_flag("--threads", std::to_string(a.threads));
  man.add_flag("--out", a.out);

  const std::vector<double> etas = parse_eta_grid(a.eta_grid);
  // One residual profile serves the whole grid: the basis draws do not
  // depend on eta, only the spectrum weighting does.
  const Matrix profile = fold_residual_profile(static_cast<std::size_t>(a.n),
                                               static_cast<std::size_t>(a.alpha),
                                               static_cast<std::size_t>(a.trials), a.seed,
                                               a.threads);
  std::string csv = man.header_text();
  csv += "eta,lowrank_exact,sketch_closed_form,sketch_empirical_mean,sketch_empirical_std\n";
  for (const double eta : etas) {
    PowerLawSpec spec;
    spec.n = static_cast<std::size_t>(a.n);
    spec.eta = eta;
    spec.alpha = static_cast<std::size_t>(a.alpha);
    const McFoldResult mc = monte_carlo_fold_from_profile(profile, spec);
    csv += fmt_g(eta) + "," + fmt_g(mc.lowrank_exact) + "," + fmt_g(sketch_error_theory(spec)) +
           "," + fmt_g(mc.sketch_mean) + "," + fmt_g(mc.sketch_std) + "\n";
  }
  write_text_file(a.out, csv);
  std::cout << "wrote " << a.out << " (" << etas.size() << " etas, " << a.trials << " trials)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sketchkit " SKETCHKIT_VERSION
               " — compress weight matrices into fine-tunable sketches"};
  app.require_subcommand(1);

  int default_threads = 1;
  try {
    default_threads = env_default_threads();
  } catch (const error& e) {
    std::cerr << "sketchkit: " << e.what() << "\n";
    return 2;
  }
  const std::string threads_help = "worker threads (0 = all cores)";

  GenArgs gen;
  gen.threads = default_threads;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a deterministic MAT1 matrix");
  gen_cmd->add_option("--shape", gen.shape, "matrix shape ROWSxCOLS")->required();
  gen_cmd->add_option("--dist", gen.dist, "gaussian or powerlaw-spectrum (default gaussian)");
  gen_cmd->add_option("--eta", gen.eta, "spectrum decay in [0, 1) for powerlaw-spectrum");
  gen_cmd->add_option("--seed", gen.seed, "generator seed (default 0)");
  gen_cmd->add_option("--threads", gen.threads, threads_help);
  gen_cmd->add_option("--out,--output", gen.out, "output .mat1 path")->required();

  SketchArgs sk;
  sk.threads = default_threads;
  CLI::App* sk_cmd = app.add_subcommand("sketch", "compress a weight matrix into a sketch");
  sk_cmd->add_option("--input", sk.input, "weight matrix (.mat1)")->required();
  sk_cmd->add_option("--calib", sk.calib, "calibration: a .mat1 path or synth:DIST:m=N")
      ->required();
  sk_cmd->add_option("--bits", sk.bits, "index width in bits: 2, 3, or 4 (default 4)");
  sk_cmd->add_option("--gpr", sk.gpr, "groups per row (default 1)");
  sk_cmd->add_option("--block", sk.block, "compensation block size (default 128)");
  sk_cmd->add_option("--s", sk.s, "sensitivity exponent (default 3)");
  sk_cmd->add_option("--damp", sk.damp, "Hessian dampening factor (default 0.01)");
  sk_cmd->add_option("--seed", sk.seed, "clustering seed (default 0)");
  sk_cmd->add_option("--threads", sk.threads, threads_help);
  sk_cmd->add_option("--out,--output", sk.output, "output .skt1 path")->required();

  ReconstructArgs rc;
  rc.threads = default_threads;
  CLI::App* rc_cmd = app.add_subcommand("reconstruct", "expand a sketch back to a dense matrix");
  rc_cmd->add_option("--model", rc.model, "sketched model (.skt1)")->required();
  rc_cmd->add_option("--threads", rc.threads, threads_help);
  rc_cmd->add_option("--out,--output", rc.output, "output .mat1 path")->required();

  InfoArgs info;
  CLI::App* info_cmd = app.add_subcommand("info", "print sketch statistics");
  info_cmd->add_option("--model", info.model, "sketched model (.skt1)");
  info_cmd->add_option("--shapes", info.shapes,
                       "layer shape list, e.g. 4096x4096*4,4096x11008,11008x4096*2");
  info_cmd->add_option("--repeat", info.repeat, "repeat the shape list N times (default 1)");
  info_cmd->add_option("--gpr", info.gpr, "groups per row for --shapes (default 1)");
  info_cmd->add_option("--bits", info.bits, "index width for --shapes (default 4)");
  info_cmd->add_option("--model-params", info.model_params,
                       "full model parameter count for an extra compression line");

  FinetuneArgs ft;
  ft.threads = default_threads;
  CLI::App* ft_cmd = app.add_subcommand("finetune", "train sketched values toward a teacher");
  ft_cmd->add_option("--model", ft.model, "starting sketch (.skt1)")->required();
  ft_cmd->add_option("--teacher", ft.teacher, "teacher weight matrix (.mat1)")->required();
  ft_cmd->add_option("--inputs", ft.inputs, "input batch (.mat1, rows = model columns)")
      ->required();
  ft_cmd->add_option("--steps", ft.steps, "training steps (default 100)");
  ft_cmd->add_option("--lr", ft.lr, "learning rate (default 0.01)");
  ft_cmd->add_option("--opt", ft.opt, "optimizer: sgd or adam (default sgd)");
  ft_cmd->add_option("--threads", ft.threads, threads_help);
  ft_cmd->add_option("--out,--output", ft.out, "output .skt1 path")->required();
  ft_cmd->add_option("--trace", ft.trace, "optional step,loss CSV path");

  AnalyzeArgs ad;
  ad.threads = default_threads;
  CLI::App* ad_cmd =
      app.add_subcommand("analyze-delta", "compare low-rank vs sketch error on a weight update");
  ad_cmd->add_option("--base", ad.base, "base weights (.mat1)")->required();
  ad_cmd->add_option("--tuned", ad.tuned, "tuned weights (.mat1)")->required();
  ad_cmd->add_option("--calib", ad.calib, "calibration: a .mat1 path or synth:DIST:m=N")
      ->required();
  ad_cmd->add_option("--ratios", ad.ratios, "comma list of compression ratios, e.g. 4,8,16")
      ->required();
  ad_cmd->add_option("--damp", ad.damp, "Hessian dampening factor (default 0.01)");
  ad_cmd->add_option("--seed", ad.seed, "mapping seed (default 0)");
  ad_cmd->add_option("--threads", ad.threads, threads_help);
  ad_cmd->add_option("--out,--output", ad.out, "output CSV path")->required();

  TheoryArgs th;
  th.threads = default_threads;
  CLI::App* th_cmd =
      app.add_subcommand("theory", "closed-form and Monte-Carlo power-law error curves");
  th_cmd->add_option("--n", th.n, "matrix size (default 1024)");
  th_cmd->add_option("--alpha", th.alpha, "compression factor dividing n (default 8)");
  th_cmd->add_option("--eta-grid", th.eta_grid,
                     "eta values VALUE or START:STOP:STEP (default 0:0.95:0.05)");
  th_cmd->add_option("--trials", th.trials, "Monte-Carlo trials (default 50)");
  th_cmd->add_option("--seed", th.seed, "trial seed (default 0)");
  th_cmd->add_option("--threads", th.threads, threads_help);
  th_cmd->add_option("--out,--output", th.out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "sketchkit: " << e.what() << "\n";
    std::cerr << app.help() << std::flush;
    return 2;
  }

  try {
    if (gen_cmd->parsed()) run_gen(gen);
    if (sk_cmd->parsed()) run_sketch(sk);
    if (rc_cmd->parsed()) run_reconstruct(rc);
    if (info_cmd->parsed()) run_info(info);
    if (ft_cmd->parsed()) run_finetune(ft);
    if (ad_cmd->parsed()) run_analyze_delta(ad);
    if (th_cmd->parsed()) run_theory(th);
  } catch (const usage_error& e) {
    std::cerr << "sketchkit: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "sketchkit: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sketchkit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
