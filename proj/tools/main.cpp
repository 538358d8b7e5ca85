#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "splatlm/io/run.hpp"
#include "splatlm/kernels/vec_kernels.hpp"

namespace {

using splatlm::io::RunConfig;

void add_scene_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--scene", cfg.scene, "'toy' or a dataset directory (transforms JSON + images)")
        ->required()
        ->envname("SPLATLM_SCENE");
    cmd->add_option("--scene-seed", cfg.scene_seed, "toy scene content seed");
    cmd->add_option("--toy-gaussians", cfg.toy.gaussians, "toy scene ground-truth Gaussian count");
    cmd->add_option("--toy-cameras", cfg.toy.train_cameras, "toy scene training cameras");
    cmd->add_option("--toy-test-cameras", cfg.toy.test_cameras, "toy scene test cameras");
    cmd->add_option("--toy-size", cfg.toy.image_size, "toy scene image size");
    cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)")
        ->envname("SPLATLM_THREADS");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levenberg-Marquardt and first-order optimizers for Gaussian-splatting scenes"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string checkpoint;
    std::string residual_dist = "uniform";
    std::string loss = "mse";
    bool real_schedule = false;

    auto* train = app.add_subcommand("train", "optimize a scene and write metrics/checkpoint");
    add_scene_options(train, cfg);
    train->add_option("--optimizer", cfg.optimizer, "lm | adam | rmsprop | sgd")
        ->check(CLI::IsMember({"lm", "adam", "rmsprop", "sgd"}))
        ->envname("SPLATLM_OPTIMIZER");
    train->add_option("--iters", cfg.iterations, "iteration budget")->check(CLI::PositiveNumber);
    train->add_option("--seed", cfg.seed, "run seed (init, batches, plans)");
    train->add_option("--out", cfg.out_dir, "output directory")->required();
    train->add_option("--gaussians", cfg.gaussians, "optimized Gaussian count (0 = scene default)");
    train->add_option("--samples-per-tile", cfg.lm.samples_per_tile, "sampled pixels per 16x16 tile");
    train->add_option("--lane-width", cfg.lm.sample_lane_width,
                      "sample counts must be multiples of this");
    train->add_option("--damping", cfg.lm.damping, "fixed LM damping lambda");
    train->add_option("--batch-size", cfg.lm.batch_size_initial, "view batch size")
        ->check(CLI::PositiveNumber);
    train->add_option("--batch-size-late", cfg.lm.batch_size_late,
                      "view batch size after the switch iteration");
    train->add_option("--pcg-iters", cfg.lm.pcg_iters_initial, "PCG iterations per step");
    train->add_option("--pcg-iters-late", cfg.lm.pcg_iters_late,
                      "PCG iterations after the switch iteration");
    train->add_option("--schedule-switch", cfg.lm.pcg_switch_iteration,
                      "iteration at which the late schedules kick in");
    train->add_option("--residual-dist", residual_dist, "pixel sampling distribution")
        ->check(CLI::IsMember({"uniform", "residual", "gaussian"}));
    train->add_option("--loss", loss, "training loss")->check(CLI::IsMember({"mse", "mse+ssim"}));
    train->add_option("--ssim-weight", cfg.lm.ssim_weight, "weight of the SSIM term");
    train->add_option("--eval-every", cfg.eval_every, "test-split evaluation period (0 = final only)");
    train->add_option("--points", cfg.points_file, "xyzrgb point list for initialization");
    train->add_flag("--deterministic", cfg.deterministic,
                    "omit wall-clock timings so equal-seed runs are byte-identical");
    train->add_flag("--real-schedule", real_schedule,
                    "use the real-world preset (batch 16->32, PCG 5->8)");
    auto* lr_mean =
        train->add_option("--lr-mean", cfg.first_order.lrs.mean, "baseline mean learning rate");
    auto* lr_color =
        train->add_option("--lr-color", cfg.first_order.lrs.color, "baseline color learning rate");
    auto* lr_opacity = train->add_option("--lr-opacity", cfg.first_order.lrs.opacity,
                                         "baseline opacity learning rate");
    auto* lr_scale =
        train->add_option("--lr-scale", cfg.first_order.lrs.scale, "baseline scale learning rate");
    auto* lr_rotation = train->add_option("--lr-rotation", cfg.first_order.lrs.rotation,
                                          "baseline rotation learning rate");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_scene_options(eval, cfg);
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--out", cfg.out_dir, "directory for eval.json (optional)");

    auto* datagen = app.add_subcommand("datagen", "emit the toy scene as an on-disk dataset");
    datagen->add_option("--out", cfg.out_dir, "output directory")->required();
    datagen->add_option("--scene-seed", cfg.scene_seed, "toy scene content seed");
    datagen->add_option("--toy-gaussians", cfg.toy.gaussians, "ground-truth Gaussian count");
    datagen->add_option("--toy-cameras", cfg.toy.train_cameras, "training cameras");
    datagen->add_option("--toy-test-cameras", cfg.toy.test_cameras, "test cameras");
    datagen->add_option("--toy-size", cfg.toy.image_size, "image size");

    auto* render = app.add_subcommand("render", "render checkpoint views to PNG files");
    add_scene_options(render, cfg);
    render->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    render->add_option("--out", cfg.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    cfg.lm.dist = residual_dist == "residual"   ? splatlm::sampling::ResidualDist::kResidual
                  : residual_dist == "gaussian" ? splatlm::sampling::ResidualDist::kGaussianCount
                                                : splatlm::sampling::ResidualDist::kUniform;
    cfg.lm.loss = loss == "mse+ssim" ? splatlm::solver::LossKind::kMseSsim
                                     : splatlm::solver::LossKind::kMse;
    cfg.first_order.loss = cfg.lm.loss;
    cfg.first_order.ssim_weight = cfg.lm.ssim_weight;
    if (cfg.optimizer == "sgd" && !lr_mean->count() && !lr_color->count() &&
        !lr_opacity->count() && !lr_scale->count() && !lr_rotation->count())
        cfg.first_order.lrs = splatlm::baselines::FirstOrderConfig::sgd_paper_lrs();
    if (real_schedule) {
        const auto preset = splatlm::solver::LmConfig::real_world_preset();
        cfg.lm.pcg_iters_initial = preset.pcg_iters_initial;
        cfg.lm.batch_size_initial = preset.batch_size_initial;
        cfg.lm.batch_size_late = preset.batch_size_late;
    }

    try {
        if (train->parsed()) {
            const auto result = splatlm::io::train_run(cfg);
            std::printf("final train loss %.8g; wrote %s\n", result.final_train_loss,
                        result.metrics_csv.string().c_str());
        } else if (eval->parsed()) {
            const auto report = splatlm::io::eval_run(cfg, checkpoint);
            std::printf("mse %.8g psnr %.4f ssim %.6f\n", report.mse, report.psnr, report.ssim);
        } else if (datagen->parsed()) {
            splatlm::io::datagen_run(cfg);
            std::printf("wrote toy dataset to %s\n", cfg.out_dir.string().c_str());
        } else if (render->parsed()) {
            splatlm::io::render_run(cfg, checkpoint);
            std::printf("wrote renders to %s\n", cfg.out_dir.string().c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
