#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mixcraft/data.hpp"
#include "mixcraft/error.hpp"
#include "mixcraft/estimator.hpp"
#include "mixcraft/inference.hpp"
#include "mixcraft/io.hpp"
#include "mixcraft/mixture.hpp"
#include "mixcraft/rng.hpp"

namespace {

using namespace mixcraft;

int default_threads() {
  if (const char* env = std::getenv("MIXCRAFT_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t > 0) return t;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string row_text(const Vector& v) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < v.size(); ++i) parts.push_back(format_double(v(i)));
  return join(parts, " ");
}

std::string manifest_path(const std::string& explicit_path, const std::string& primary) {
  return explicit_path.empty() ? primary + ".manifest.json" : explicit_path;
}

Dataset load_data(const std::string& path) { return load_csv(path, csv_has_header(path)); }

std::vector<std::string> axis_header(Eigen::Index d) {
  std::vector<std::string> h;
  for (Eigen::Index i = 1; i <= d; ++i) h.push_back("y" + std::to_string(i));
  return h;
}

/// Estimator flags shared by fit, boot and classify.
struct EstimatorFlags {
  std::string preprocessing = "histogram";
  std::string criterion = "AIC";
  int cmax = 15;
  std::vector<int> K;
  std::vector<double> y0, ymin, ymax;
  double ar = 0.1;
  std::string restraints = "loose";

  void add(CLI::App* cmd) {
    cmd->add_option("--preprocessing", preprocessing, "histogram | Parzen window | k-nearest neighbour")->capture_default_str();
    cmd->add_option("--criterion", criterion, "information criterion, e.g. BIC")->capture_default_str();
    cmd->add_option("--cmax", cmax, "maximum number of components")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--K", K, "candidate numbers of bins or neighbours (default: automatic grid)");
    cmd->add_option("--y0", y0, "histogram origins, one per variable");
    cmd->add_option("--ymin", ymin, "minimum observations, one per variable");
    cmd->add_option("--ymax", ymax, "maximum observations, one per variable");
    cmd->add_option("--ar", ar, "acceleration rate in (0, 1]")->capture_default_str();
    cmd->add_option("--restraints", restraints, "rigid | loose")->capture_default_str();
  }

  EstimatorConfig config(Eigen::Index d, int threads) const {
    EstimatorConfig c;
    c.preprocessing = parse_preprocessing(preprocessing);
    c.criterion = parse_criterion(criterion);
    c.cmax = cmax;
    if (!K.empty()) c.K = KGrid{K};
    auto vec = [d](const std::vector<double>& xs, const char* name) -> std::optional<Vector> {
      if (xs.empty()) return std::nullopt;
      if (static_cast<Eigen::Index>(xs.size()) != d) throw Error(ErrorCode::DimensionMismatch, std::string(name) + " needs one value per variable");
      return Eigen::Map<const Vector>(xs.data(), d);
    };
    c.range.y0 = vec(y0, "--y0");
    c.range.ymin = vec(ymin, "--ymin");
    c.range.ymax = vec(ymax, "--ymax");
    c.ar = ar;
    c.restraints = parse_restraints(restraints);
    c.threads = threads;
    c.validate();
    return c;
  }
};

struct Context {
  std::vector<std::string> argv;
  std::string command;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string manifest;
  int exit_code = 0;
  std::vector<std::string> inputs, outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write_manifest(const std::string& primary, const std::string& config) const {
    Json doc;
    doc["command"] = command;
    doc["argv"] = argv;
    doc["config"] = config;
    doc["seed"] = seed;
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    doc["version"] = kVersion;
    write_json(manifest_path(manifest, primary), doc);
  }
};

void print_model(const MixtureModel& model) {
  std::vector<std::string> w;
  for (double x : model.w()) w.push_back(fixed(x));
  std::cout << "w: " << join(w, " ") << '\n';
  for (std::size_t l = 0; l < model.c(); ++l) {
    const Component& comp = model.component(l);
    std::cout << "component " << l + 1 << ": mu = " << row_text(comp.mu()) << "; sigma = " << row_text(Eigen::Map<const Vector>(comp.sigma().matrix().data(), comp.sigma().matrix().size()))
              << '\n';
  }
}

int run(std::vector<std::string> args);

int dispatch(CLI::App& app, std::vector<std::string> args, Context& ctx, std::function<void()>& action) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  ctx.argv = std::move(args);
  try {
    action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_numerical() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return ctx.exit_code;
}

int run(std::vector<std::string> args) {
  CLI::App app{"Finite mixtures of multivariate normal densities estimated by REBMIX"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Context ctx;
  ctx.threads = default_threads();
  std::function<void()> action;

  auto add_common = [&](CLI::App* cmd, bool seeded) {
    if (seeded) cmd->add_option("--seed", ctx.seed, "master seed")->capture_default_str();
    cmd->add_option("--threads", ctx.threads, "worker threads (default: MIXCRAFT_THREADS or all cores)")->check(CLI::PositiveNumber);
    cmd->add_option("--manifest", ctx.manifest, "run manifest path (default: <output>.manifest.json)");
  };

  // generate
  GeneratorSpec gspec;
  long gd = 2;
  std::vector<double> mu_range{-100.0, 100.0}, lambda_range{1.0, 100.0};
  std::string gout, glabels, gmodel;
  auto* gen = app.add_subcommand("generate", "draw a random mixture and a dataset from it");
  gen->add_option("--d", gd, "dimension")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--c", gspec.c, "number of components")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--n", gspec.n, "number of observations")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--mu", mu_range, "range of component means")->expected(2)->capture_default_str();
  gen->add_option("--lambda", lambda_range, "range of covariance eigenvalues")->expected(2)->capture_default_str();
  gen->add_option("--out", gout, "dataset CSV")->required();
  gen->add_option("--labels", glabels, "true component labels CSV");
  gen->add_option("--model-out", gmodel, "ground-truth model JSON");
  add_common(gen, true);
  gen->callback([&] {
    action = [&] {
      ctx.command = "generate";
      gspec.d = gd;
      gspec.mu_range = {mu_range[0], mu_range[1]};
      gspec.lambda_range = {lambda_range[0], lambda_range[1]};
      gspec.seed = ctx.seed;
      const GeneratedModel g = generate_random_model(gspec);
      SeededGenerator rng = SeededGenerator::substream(ctx.seed, "sample");
      const LabeledDataset ld = sample(g.model, g.n_per_component, rng, detail::stem(gout));
      write_csv(gout, ld.data.values, axis_header(gd));
      ctx.outputs.push_back(gout);
      if (!glabels.empty()) {
        Matrix none(ld.data.n(), 0);
        write_csv(glabels, none, {"label"}, &ld.labels, 1);
        ctx.outputs.push_back(glabels);
      }
      if (!gmodel.empty()) {
        save_model(gmodel, g.model);
        ctx.outputs.push_back(gmodel);
      }
      ctx.write_manifest(gout, gen->config_to_str(true, false));
      print_model(g.model);
      std::cout << "ymin: " << row_text(ld.data.values.colwise().minCoeff().transpose()) << '\n';
      std::cout << "ymax: " << row_text(ld.data.values.colwise().maxCoeff().transpose()) << '\n';
    };
  });

  // fit
  EstimatorFlags fflags;
  std::string fdata, fout, fsummary, fopt, fall;
  auto* fitc = app.add_subcommand("fit", "estimate a mixture from a dataset");
  fitc->add_option("--data", fdata, "dataset CSV")->required();
  fflags.add(fitc);
  fitc->add_option("--out", fout, "model JSON")->required();
  fitc->add_option("--summary", fsummary, "summary CSV");
  fitc->add_option("--opt", fopt, "per-K optimum diagnostics CSV");
  fitc->add_option("--all", fall, "per-K criterion CSV");
  add_common(fitc, true);
  fitc->callback([&] {
    action = [&] {
      ctx.command = "fit";
      const Dataset data = load_data(fdata);
      ctx.inputs.push_back(fdata);
      const FitResult r = fit(data, fflags.config(data.d(), ctx.threads));
      save_model(fout, r.model);
      ctx.outputs.push_back(fout);
      const std::string summary = summary_csv(r.summary);
      if (!fsummary.empty()) {
        write_text(fsummary, summary);
        ctx.outputs.push_back(fsummary);
      }
      if (!fopt.empty()) {
        write_text(fopt, opt_csv(r));
        ctx.outputs.push_back(fopt);
      }
      if (!fall.empty()) {
        write_text(fall, all_csv(r));
        ctx.outputs.push_back(fall);
      }
      ctx.write_manifest(fout, fitc->config_to_str(true, false));
      std::cout << summary;
    };
  });

  // boot
  EstimatorFlags bflags;
  std::string bmodel, bdata, bmode = "parametric", bout;
  int B = 100;
  auto* boot = app.add_subcommand("boot", "bootstrap the number of components and parameter spread");
  boot->add_option("--model", bmodel, "fitted model JSON")->required();
  boot->add_option("--data", bdata, "dataset the model was fitted to")->required();
  boot->add_option("--mode", bmode, "parametric | nonparametric")->capture_default_str()->check(CLI::IsMember({"parametric", "nonparametric"}));
  boot->add_option("-B", B, "number of replicates")->capture_default_str()->check(CLI::Range(2, 1000000));
  bflags.add(boot);
  boot->add_option("--out", bout, "bootstrap result JSON")->required();
  add_common(boot, true);
  boot->callback([&] {
    action = [&] {
      ctx.command = "boot";
      const MixtureModel model = load_model(bmodel);
      const Dataset data = load_data(bdata);
      ctx.inputs = {bmodel, bdata};
      SeededGenerator rng = SeededGenerator::substream(ctx.seed, "boot");
      const BootstrapResult r = bootstrap(model, data, parse_bootstrap_mode(bmode), B, rng, bflags.config(data.d(), ctx.threads));
      write_json(bout, bootstrap_to_json(r));
      ctx.outputs.push_back(bout);
      ctx.write_manifest(bout, boot->config_to_str(true, false));
      if (r.failures > 0) std::cerr << "warning: " << r.failures << " of " << r.B << " replicates failed\n";
      std::vector<std::string> header{""}, wrow{"w.cv"};
      for (std::size_t l = 0; l < r.w.size(); ++l) {
        header.push_back(std::to_string(l + 1));
        wrow.push_back(fixed(r.w[l].cv));
      }
      std::cout << format_table(header, {wrow}) << '\n';
      const auto d = static_cast<std::size_t>(data.d());
      std::vector<std::vector<std::string>> t1, t2;
      for (std::size_t i = 0; i < d; ++i) {
        std::vector<std::string> row{"theta1.cv." + std::to_string(i + 1)};
        for (const auto& comp : r.theta1) row.push_back(fixed(comp[i].cv));
        t1.push_back(std::move(row));
      }
      for (std::size_t i = 0; i < d * d; ++i) {
        std::vector<std::string> row{"theta2.cv." + std::to_string(i / d + 1) + "." + std::to_string(i % d + 1)};
        for (const auto& comp : r.theta2) row.push_back(fixed(comp[i].cv));
        t2.push_back(std::move(row));
      }
      std::cout << format_table(header, t1) << '\n' << format_table(header, t2) << '\n';
      std::cout << "Mode probability = " << fixed(r.c_prob) << " at c = " << r.c_mode << " components.\n";
    };
  });

  // cluster
  std::string cmodel, cdata, ctruth, cout_path, ctree;
  auto* clu = app.add_subcommand("cluster", "merge mixture components into clusters");
  clu->add_option("--model", cmodel, "fitted model JSON")->required();
  clu->add_option("--data", cdata, "dataset CSV")->required();
  clu->add_option("--truth", ctruth, "true labels CSV");
  clu->add_option("--out", cout_path, "cluster ids per level CSV")->required();
  clu->add_option("--tree", ctree, "merge table CSV");
  add_common(clu, false);
  clu->callback([&] {
    action = [&] {
      ctx.command = "cluster";
      const MixtureModel model = load_model(cmodel);
      const Dataset data = load_data(cdata);
      ctx.inputs = {cmodel, cdata};
      std::optional<std::vector<int>> truth;
      if (!ctruth.empty()) {
        truth = load_labels(ctruth);
        ctx.inputs.push_back(ctruth);
      }
      const ClusteringResult r = merge_clusters(model, data, truth ? &*truth : nullptr);
      Matrix zp(data.n(), r.c);
      std::vector<std::string> header;
      for (int k = 1; k <= r.c; ++k) {
        header.push_back("c" + std::to_string(k));
        for (Eigen::Index j = 0; j < data.n(); ++j) zp(j, k - 1) = r.Zp[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)];
      }
      write_csv(cout_path, zp, header);
      ctx.outputs.push_back(cout_path);
      std::vector<std::vector<std::string>> rows;
      for (int k = r.c; k >= 1; --k) {
        const auto i = static_cast<std::size_t>(k - 1);
        std::vector<std::string> row{std::to_string(k)};
        if (k < r.c) {
          row.insert(row.end(), {std::to_string(r.from[i]), std::to_string(r.to[i])});
        } else {
          row.insert(row.end(), {kUndefined, kUndefined});
        }
        row.push_back(format_double(r.EN[i]));
        row.push_back(k < r.c ? format_double(r.ED[i]) : kUndefined);
        if (r.prob) row.push_back(format_double((*r.prob)[i]));
        rows.push_back(std::move(row));
      }
      std::vector<std::string> tree_header{"level", "from", "to", "EN", "ED"};
      if (r.prob) tree_header.push_back("prob");
      if (!ctree.empty()) {
        std::string text = join(tree_header, ",") + "\n";
        for (const auto& row : rows) text += join(row, ",") + "\n";
        write_text(ctree, text);
        ctx.outputs.push_back(ctree);
      }
      ctx.write_manifest(cout_path, clu->config_to_str(true, false));
      std::cout << format_table(tree_header, rows);
      if (r.prob) {
        const std::size_t copt = r.copt();
        std::cout << "copt = " << copt << "\nprob[copt] = " << fixed((*r.prob)[copt - 1]) << '\n';
      }
    };
  });

  // classify
  EstimatorFlags kflags;
  kflags.cmax = 5;
  std::string ktrain, ktest, ktruth, kout, kcm;
  int kclass_col = 1;
  auto* cls = app.add_subcommand("classify", "fit one mixture per class and classify test rows");
  cls->add_option("--train", ktrain, "labeled training CSV")->required();
  cls->add_option("--test", ktest, "test CSV, with or without the class column")->required();
  cls->add_option("--class-col", kclass_col, "1-based class column of the labeled CSVs")->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--truth", ktruth, "true test labels CSV");
  kflags.add(cls);
  cls->get_option("--cmax")->default_val(5);
  cls->add_option("--out", kout, "predicted class per test row CSV")->required();
  cls->add_option("--cm", kcm, "confusion matrix CSV (Test, Predictive, Frequency)");
  add_common(cls, false);
  cls->callback([&] {
    action = [&] {
      ctx.command = "classify";
      const LabeledDataset train = load_labeled_csv(ktrain, csv_has_header(ktrain), kclass_col);
      ctx.inputs = {ktrain, ktest};
      const bool test_header = csv_has_header(ktest);
      const Matrix raw = load_csv_matrix(ktest, test_header);
      std::optional<std::vector<int>> truth;
      Dataset test;
      if (raw.cols() == train.data.d() + 1) {
        const LabeledDataset lt = load_labeled_csv(ktest, test_header, kclass_col);
        test = lt.data;
        truth = lt.labels;
      } else {
        test = Dataset(detail::stem(ktest), raw);
      }
      if (!ktruth.empty()) {
        truth = load_labels(ktruth);
        ctx.inputs.push_back(ktruth);
      }
      const TrainedClassifier tc = train_classifier(train, kflags.config(train.data.d(), ctx.threads));
      const ClassificationResult r = classify(tc.models(), tc.priors, test, truth ? &*truth : nullptr);
      Matrix none(test.n(), 0);
      write_csv(kout, none, {"Zp"}, &r.Zp, 1);
      ctx.outputs.push_back(kout);
      if (r.CM) {
        const CountMatrix& cm = *r.CM;
        std::string text = "Test,Predictive,Frequency\n";
        for (Eigen::Index p = 0; p < cm.cols(); ++p)
          for (Eigen::Index t = 0; t < cm.rows(); ++t) text += std::to_string(t + 1) + "," + std::to_string(p + 1) + "," + std::to_string(cm(t, p)) + "\n";
        if (!kcm.empty()) {
          write_text(kcm, text);
          ctx.outputs.push_back(kcm);
        }
      }
      ctx.write_manifest(kout, cls->config_to_str(true, false));
      if (r.metrics) {
        const ConfusionMetrics& m = *r.metrics;
        std::vector<std::vector<std::string>> rows;
        for (std::size_t s = 0; s < m.precision.size(); ++s)
          rows.push_back({std::to_string(s + 1), metric_text(m.precision[s]), metric_text(m.sensitivity[s]), metric_text(m.specificity[s])});
        std::cout << format_table({"class", "Precision", "Sensitivity", "Specificity"}, rows);
        std::cout << "Accuracy = " << format_double(m.accuracy) << ".\nError = " << format_double(m.error) << ".\n";
      } else {
        std::cout << "Classified " << test.n() << " observations.\n";
      }
    };
  });

  // split
  std::string sdata, strain, stest;
  int sclass_col = 1;
  double sp = 0.6;
  auto* spl = app.add_subcommand("split", "stratified train/test split of a labeled dataset");
  spl->add_option("--data", sdata, "labeled CSV")->required();
  spl->add_option("--class-col", sclass_col, "1-based class column")->capture_default_str()->check(CLI::PositiveNumber);
  spl->add_option("--p", sp, "train fraction")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  spl->add_option("--out-train", strain, "train CSV")->required();
  spl->add_option("--out-test", stest, "test CSV")->required();
  add_common(spl, true);
  spl->callback([&] {
    action = [&] {
      ctx.command = "split";
      const bool header = csv_has_header(sdata);
      const LabeledDataset ld = load_labeled_csv(sdata, header, sclass_col);
      ctx.inputs.push_back(sdata);
      SeededGenerator rng = SeededGenerator::substream(ctx.seed, "split");
      const SplitResult r = split(ld, sp, rng);
      std::vector<std::string> h = axis_header(ld.data.d());
      h.insert(h.begin() + (sclass_col - 1), "class");
      write_csv(strain, r.train.front().data.values, h, &r.train.front().labels, sclass_col);
      Matrix test_values = r.test_labels.empty() ? Matrix(0, ld.data.d()) : r.test.values;
      write_csv(stest, test_values, h, &r.test_labels, sclass_col);
      ctx.outputs = {strain, stest};
      ctx.write_manifest(strain, spl->config_to_str(true, false));
      std::cout << "train: " << r.train.front().data.n() << " rows\ntest: " << r.test_labels.size() << " rows\n";
    };
  });

  // density-grid
  std::string gmodel_in, grid_out;
  std::vector<double> bounds;
  int resolution = 101;
  auto* grid = app.add_subcommand("density-grid", "evaluate a model on a regular grid");
  grid->add_option("--model", gmodel_in, "model JSON")->required();
  grid->add_option("--bounds", bounds, "low high pairs, one per variable")->required();
  grid->add_option("--resolution", resolution, "points per axis")->capture_default_str()->check(CLI::PositiveNumber);
  grid->add_option("--out", grid_out, "grid CSV")->required();
  add_common(grid, false);
  grid->callback([&] {
    action = [&] {
      ctx.command = "density-grid";
      const MixtureModel model = load_model(gmodel_in);
      ctx.inputs.push_back(gmodel_in);
      const Eigen::Index d = model.d();
      if (static_cast<Eigen::Index>(bounds.size()) != 2 * d) throw Error(ErrorCode::DimensionMismatch, "--bounds needs a low/high pair per variable");
      long total = 1;
      for (Eigen::Index i = 0; i < d; ++i) total *= resolution;
      Matrix points(total, d);
      for (long r = 0; r < total; ++r) {
        long rest = r;
        for (Eigen::Index i = d - 1; i >= 0; --i) {
          const long idx = rest % resolution;
          rest /= resolution;
          const double lo = bounds[static_cast<std::size_t>(2 * i)], hi = bounds[static_cast<std::size_t>(2 * i + 1)];
          points(r, i) = resolution == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(idx) / (resolution - 1);
        }
      }
      const Vector density = model.log_pdf_rows(points).array().exp();
      const Matrix joint = model.joint_log_rows(points);
      std::ofstream out(grid_out, std::ios::binary);
      if (!out) throw Error(ErrorCode::Io, "cannot write " + grid_out);
      out << join(axis_header(d), ",") << ",density,component\n";
      for (long r = 0; r < total; ++r) {
        Eigen::Index best = 0;
        joint.row(r).maxCoeff(&best);
        for (Eigen::Index i = 0; i < d; ++i) out << format_double(points(r, i)) << ',';
        out << format_double(density(r)) << ',' << best + 1 << '\n';
      }
      out.close();
      ctx.outputs.push_back(grid_out);
      ctx.write_manifest(grid_out, grid->config_to_str(true, false));
      std::cout << "Wrote " << total << " grid points.\n";
    };
  });

  // replay
  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_path, "manifest JSON")->required();
  replay->callback([&] {
    action = [&] {
      const Json doc = read_json(replay_path);
      std::vector<std::string> recorded;
      try {
        recorded = doc.at("argv").get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, replay_path + ": " + e.what());
      }
      if (!recorded.empty() && recorded.front() == "replay") throw Error(ErrorCode::InvalidArgument, "manifest records a replay");
      ctx.exit_code = run(recorded);
    };
  });

  return dispatch(app, std::move(args), ctx, action);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}
