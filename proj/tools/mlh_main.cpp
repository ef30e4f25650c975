#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "mlh/dataset.hpp"
#include "mlh/errors.hpp"
#include "mlh/image.hpp"
#include "mlh/mesh_io.hpp"
#include "mlh/sampling.hpp"
#include "mlh/serialize.hpp"
#include "mlh/train.hpp"
#include "mlh/voxel.hpp"

namespace fs = std::filesystem;
using namespace mlh;

namespace {

ViewDirection view_by_name(const std::string& name) {
  if (name == "x") return ViewDirection::pos_x();
  if (name == "y") return ViewDirection::pos_y();
  if (name == "z") return ViewDirection::pos_z();
  throw ConfigInvalid("unknown view '" + name + "'");
}

void write_text_file(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
}

fs::path view_suffixed(const fs::path& base, char axis) {
  fs::path out = base;
  const std::string ext = out.extension().string();
  out.replace_extension();
  out += std::string(".") + axis;
  out += ext;
  return out;
}

int run_compute(const std::string& mesh_path, const std::string& view, std::uint32_t n,
                std::uint32_t k, std::uint64_t seed, const std::string& out) {
  const TriangleMesh mesh = load_mesh_file(mesh_path);
  validate_mesh(mesh);
  SamplingConfig config;
  config.rng_seed = seed;
  const PointCloud cloud = sample_surface(mesh, required_point_count(n, k, config), seed);

  if (view == "all") {
    const char axes[3] = {'x', 'y', 'z'};
    const ViewDirection dirs[3] = {ViewDirection::pos_x(), ViewDirection::pos_y(),
                                   ViewDirection::pos_z()};
    for (int v = 0; v < 3; ++v) {
      const fs::path path = view_suffixed(out, axes[v]);
      write_descriptor_file(compute_mlh(cloud, n, k, dirs[v]), path);
      std::cout << path.string() << "\n";
    }
  } else {
    write_descriptor_file(compute_mlh(cloud, n, k, view_by_name(view)), out);
    std::cout << out << "\n";
  }
  return 0;
}

int run_check(const std::string& mesh_path, std::uint32_t n, std::uint32_t k, std::uint32_t r,
              std::uint64_t seed) {
  if (r == 0) r = n;
  const TriangleMesh mesh = load_mesh_file(mesh_path);
  validate_mesh(mesh);
  SamplingConfig config;
  config.rng_seed = seed;
  const PointCloud cloud = sample_surface(mesh, required_point_count(n, k, config), seed);

  bool all_pass = true;
  const char* names[3] = {"X", "Y", "Z"};
  const ViewDirection dirs[3] = {ViewDirection::pos_x(), ViewDirection::pos_y(),
                                 ViewDirection::pos_z()};
  for (int v = 0; v < 3; ++v) {
    const PointCloud normalized = orient_and_normalize(cloud, dirs[v]);
    const MLHDescriptor desc = compute_mlh_from_normalized(normalized, n, k, dirs[v]);
    const VoxelGrid grid = voxelize_points(normalized, r);

    const bool occupancy_ok = occupancy_matches(desc, grid);
    const double deviation = max_entrywise_deviation(desc, mlh_from_voxels(grid, k));
    const double bound = 1.0 / static_cast<double>(r);
    const ConsistencyReport report = consistency_check(desc, grid);
    const bool pass = occupancy_ok && deviation <= bound && report.pass();
    all_pass = all_pass && pass;

    std::printf("view %s: occupancy %s, max |desc - oracle| %.6f (bound %.6f), "
                "attestation violations %zu of %zu heights -> %s\n",
                names[v], occupancy_ok ? "matches" : "MISMATCH", deviation, bound,
                report.violations.size(), report.checked_heights, pass ? "pass" : "FAIL");
  }
  return all_pass ? 0 : 1;
}

int run_render(const std::string& input, std::uint32_t layer, const std::string& out) {
  const MLHDescriptor desc = read_descriptor_file(input);
  const GrayImage image = export_layer_image(desc, layer);
  std::string ext = fs::path(out).extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") {
    write_png(image, out);
  } else {
    write_pgm(image, out);
  }
  std::cout << out << "\n";
  return 0;
}

int run_train(const std::string& dataset_path, const std::string& merge, int epochs, int batch,
              double lr, double momentum, int decay_epoch, std::uint64_t seed,
              const std::string& ckpt_out, const std::string& report_out) {
  const Dataset dataset = read_dataset_file(dataset_path);
  TrainOptions options;
  apply_variant(options.network, merge);
  options.sgd.epochs = epochs;
  options.sgd.batch_size = batch;
  options.sgd.learning_rate = lr;
  options.sgd.momentum = momentum;
  options.sgd.decay_epoch = decay_epoch;
  options.seed = seed;

  TrainResult result = train(dataset, options);
  for (const EpochStats& e : result.report.epochs) {
    std::printf("epoch %2d: train loss %.4f, train acc %.4f, test acc %.4f\n", e.epoch,
                e.train_loss, e.train_accuracy, e.test_accuracy);
  }
  if (!ckpt_out.empty()) write_checkpoint_file(result.net, ckpt_out);
  if (!report_out.empty()) write_text_file(report_to_json(result.report), report_out);
  std::printf("final test accuracy %.4f\n", result.report.final_test_accuracy);
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& dataset_path,
             const std::string& report_out, const std::string& split_name) {
  auto net = read_checkpoint_file(ckpt_path);
  const Dataset dataset = read_dataset_file(dataset_path);
  const Split split = split_name == "train" ? Split::Train
                      : split_name == "all" ? Split::All
                                            : Split::Test;
  const EvalResult result = evaluate(net, dataset, split);
  if (!report_out.empty()) write_text_file(eval_to_json(result, dataset.class_names), report_out);
  std::printf("accuracy %.4f over %zu samples\n", result.accuracy, result.sample_count);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-layered height-map descriptors and multi-view classification"};
  app.require_subcommand(1);

  // compute
  auto* compute = app.add_subcommand("compute", "Compute MLH descriptors of one mesh");
  std::string compute_mesh, compute_view = "all", compute_out;
  std::uint32_t compute_n = 256, compute_k = 5;
  std::uint64_t compute_seed = 0;
  compute->add_option("mesh", compute_mesh, "OFF or OBJ mesh")->required();
  compute->add_option("--view", compute_view, "x, y, z or all")
      ->check(CLI::IsMember({"x", "y", "z", "all"}));
  compute->add_option("--n", compute_n, "grid resolution");
  compute->add_option("--k", compute_k, "layers per bin");
  compute->add_option("--seed", compute_seed, "sampling seed");
  compute->add_option("-o,--output", compute_out, "output .mlhd path")->required();

  // batch
  auto* batch = app.add_subcommand("batch", "Build a dataset from a ModelNet-style tree");
  std::string batch_dir, batch_out;
  std::uint32_t batch_n = 32, batch_k = 5;
  std::uint64_t batch_seed = 0;
  batch->add_option("dir", batch_dir, "root with <class>/{train,test}/*.off")->required();
  batch->add_option("--n", batch_n, "grid resolution");
  batch->add_option("--k", batch_k, "layers per bin");
  batch->add_option("--seed", batch_seed, "sampling seed");
  batch->add_option("-o,--output", batch_out, "output .mlhs path")->required();

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Generate the synthetic primitive benchmark");
  std::uint32_t gen_classes = 4, gen_per_class = 0, gen_n = 32, gen_k = 5;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--classes", gen_classes, "class count (2..4)");
  gen->add_option("--per-class", gen_per_class, "shapes per class")->required();
  gen->add_option("--n", gen_n, "grid resolution");
  gen->add_option("--k", gen_k, "layers per bin");
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("-o,--output", gen_out, "output .mlhs path")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a multi-view classifier");
  std::string train_dataset, train_merge = "ind-cat", train_ckpt, train_report;
  int train_epochs = 20, train_batch = 8, train_decay = 10;
  double train_lr = 0.01, train_momentum = 0.9;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("dataset", train_dataset, ".mlhs dataset")->required();
  train_cmd->add_option("--merge", train_merge, "shared-max, ind-max or ind-cat")
      ->check(CLI::IsMember({"shared-max", "ind-max", "ind-cat"}));
  train_cmd->add_option("--epochs", train_epochs, "epoch count");
  train_cmd->add_option("--batch", train_batch, "batch size");
  train_cmd->add_option("--lr", train_lr, "initial learning rate");
  train_cmd->add_option("--momentum", train_momentum, "SGD momentum");
  train_cmd->add_option("--decay-epoch", train_decay, "epochs per 10x learning-rate decay");
  train_cmd->add_option("--seed", train_seed, "training seed");
  train_cmd->add_option("-o,--output", train_ckpt, "checkpoint output path");
  train_cmd->add_option("--report", train_report, "JSON report output path");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string eval_ckpt, eval_dataset, eval_report, eval_split = "test";
  eval_cmd->add_option("checkpoint", eval_ckpt, ".mlhw checkpoint")->required();
  eval_cmd->add_option("dataset", eval_dataset, ".mlhs dataset")->required();
  eval_cmd->add_option("--report", eval_report, "JSON report output path");
  eval_cmd->add_option("--split", eval_split, "test, train or all")
      ->check(CLI::IsMember({"test", "train", "all"}));

  // render
  auto* render = app.add_subcommand("render", "Render one descriptor layer as an image");
  std::string render_in, render_out;
  std::uint32_t render_layer = 1;
  render->add_option("descriptor", render_in, ".mlhd file")->required();
  render->add_option("--layer", render_layer, "1-based layer index")->required();
  render->add_option("-o,--output", render_out, "output .pgm or .png path")->required();

  // check
  auto* check = app.add_subcommand("check", "Voxel-oracle consistency check of one mesh");
  std::string check_mesh;
  std::uint32_t check_n = 32, check_k = 2, check_r = 0;
  std::uint64_t check_seed = 0;
  check->add_option("mesh", check_mesh, "OFF or OBJ mesh")->required();
  check->add_option("--n", check_n, "grid resolution");
  check->add_option("--k", check_k,
                    "layers per bin (attestation of middle layers needs k <= 2)");
  check->add_option("--r", check_r, "oracle resolution (defaults to --n)");
  check->add_option("--seed", check_seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compute) {
      return run_compute(compute_mesh, compute_view, compute_n, compute_k, compute_seed,
                         compute_out);
    }
    if (*batch) {
      write_dataset_file(build_dataset_from_tree(batch_dir, batch_n, batch_k, batch_seed),
                         batch_out);
      std::cout << batch_out << "\n";
      return 0;
    }
    if (*gen) {
      write_dataset_file(build_synthetic_dataset(gen_classes, gen_per_class, gen_n, gen_k,
                                                 gen_seed),
                         gen_out);
      std::cout << gen_out << "\n";
      return 0;
    }
    if (*train_cmd) {
      return run_train(train_dataset, train_merge, train_epochs, train_batch, train_lr,
                       train_momentum, train_decay, train_seed, train_ckpt, train_report);
    }
    if (*eval_cmd) return run_eval(eval_ckpt, eval_dataset, eval_report, eval_split);
    if (*render) return run_render(render_in, render_layer, render_out);
    if (*check) return run_check(check_mesh, check_n, check_k, check_r, check_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
