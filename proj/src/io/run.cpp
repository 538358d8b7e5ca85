#include "splatlm/io/run.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "splatlm/core/parallel.hpp"
#include "splatlm/io/checkpoint.hpp"
#include "splatlm/render/rasterizer.hpp"

namespace splatlm::io {

namespace {

struct LoadedScene {
    SceneDataset train;
    SceneDataset test;  // may be empty
    Vec3<double> cube_min{-1.5, -1.5, -1.5};
    Vec3<double> cube_max{1.5, 1.5, 1.5};
    int default_gaussians = 10000;
};

LoadedScene load_scene(const RunConfig& cfg) {
    LoadedScene scene;
    if (cfg.scene == "toy") {
        std::mt19937_64 scene_rng(cfg.scene_seed);
        ToyScene toy = generate_toy_scene(cfg.toy, scene_rng);
        scene.train = std::move(toy.train);
        scene.test = std::move(toy.test);
        scene.cube_min = {-1.0, -1.0, -1.0};
        scene.cube_max = {1.0, 1.0, 1.0};
        scene.default_gaussians = 2 * cfg.toy.gaussians;
        return scene;
    }
    scene.train = load_nerf_synthetic(cfg.scene, "train");
    try {
        scene.test = load_nerf_synthetic(cfg.scene, "test");
    } catch (const std::exception&) {
        // no test split; evaluation columns stay empty
    }
    return scene;
}

GaussianSet initial_state(const RunConfig& cfg, const LoadedScene& scene, std::mt19937_64& rng) {
    if (!cfg.points_file.empty()) return init_from_points(load_points_xyzrgb(cfg.points_file));
    const int count = cfg.gaussians > 0 ? cfg.gaussians : scene.default_gaussians;
    return random_init(count, scene.cube_min, scene.cube_max, rng);
}

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct CsvWriter {
    std::ofstream out;
    bool deterministic = false;

    void open(const std::filesystem::path& path, bool det) {
        deterministic = det;
        out.open(path);
        out << kMetricsCsvHeader << "\n";
    }
    void row(int iter, double wall_ms, double train_loss, const std::string& psnr,
             const std::string& ssim, const std::string& eta, const std::string& pcg,
             const std::string& breakdown) {
        out << iter << ',' << (deterministic ? std::string() : fmt(wall_ms, "%.3f")) << ','
            << fmt(train_loss) << ',' << psnr << ',' << ssim << ',' << eta << ',' << pcg << ','
            << breakdown << "\n";
    }
};

metrics::MetricReport evaluate_split(const GaussianSet& state, const SceneDataset& split) {
    metrics::MetricReport mean;
    if (split.cameras.empty()) return mean;
    for (size_t i = 0; i < split.cameras.size(); ++i) {
        const Image rendered = render::render_full(state, split.cameras[i]).image;
        const auto r = metrics::evaluate(rendered, widen(split.images[i]));
        mean.mse += r.mse;
        mean.psnr += r.psnr;
        mean.ssim += r.ssim;
    }
    const double n = static_cast<double>(split.cameras.size());
    mean.mse /= n;
    mean.psnr /= n;
    mean.ssim /= n;
    return mean;
}

void write_test_renders(const GaussianSet& state, const SceneDataset& test,
                        const std::filesystem::path& dir, int iter) {
    if (test.cameras.empty()) return;
    std::filesystem::create_directories(dir);
    for (size_t i = 0; i < test.cameras.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "iter%06d_test%02zu.png", iter, i);
        write_png8(dir / name, render::render_full(state, test.cameras[i]).image);
    }
}

nlohmann::json config_json(const RunConfig& cfg) {
    return {{"scene", cfg.scene},
            {"optimizer", cfg.optimizer},
            {"iterations", cfg.iterations},
            {"seed", cfg.seed},
            {"gaussians", cfg.gaussians},
            {"samples_per_tile", cfg.lm.samples_per_tile},
            {"damping", cfg.lm.damping},
            {"residual_dist", sampling::to_string(cfg.lm.dist)},
            {"loss", cfg.lm.loss == solver::LossKind::kMseSsim ? "mse+ssim" : "mse"},
            {"deterministic", cfg.deterministic}};
}

}  // namespace

TrainResult train_run(const RunConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("iteration budget must be at least 1");
    if (cfg.threads > 0) set_thread_count(cfg.threads);
    std::filesystem::create_directories(cfg.out_dir);

    const LoadedScene scene = load_scene(cfg);
    std::mt19937_64 rng(cfg.seed);
    GaussianSet state = initial_state(cfg, scene, rng);

    solver::TrainData data;
    data.cameras = scene.train.cameras;
    data.images.reserve(scene.train.images.size());
    for (const auto& img : scene.train.images) data.images.push_back(widen(img));

    const bool is_lm = cfg.optimizer == "lm";
    baselines::FirstOrderConfig fo = cfg.first_order;
    if (cfg.optimizer == "adam") fo.kind = baselines::FirstOrderKind::kAdam;
    else if (cfg.optimizer == "rmsprop") fo.kind = baselines::FirstOrderKind::kRmsprop;
    else if (cfg.optimizer == "sgd") fo.kind = baselines::FirstOrderKind::kSgdMomentum;
    else if (!is_lm) throw std::invalid_argument("unknown optimizer: " + cfg.optimizer);
    if (fo.decay_iterations == 0) fo.decay_iterations = cfg.iterations;
    baselines::FirstOrderState fo_state = baselines::FirstOrderState::zeros(state.param_count());

    int cluster_k = 0;
    const std::uint64_t cluster_seed = cfg.seed ^ 0x9e3779b97f4a7c15ull;
    auto ensure_clusters = [&](int iteration) {
        if (!is_lm) return;
        const int k = std::min<int>(cfg.lm.batch_size_at(iteration),
                                    static_cast<int>(data.cameras.size()));
        if (k != cluster_k) {
            data.rebuild_clusters(k, cluster_seed);
            cluster_k = k;
        }
    };

    TrainResult result;
    result.metrics_csv = cfg.out_dir / "metrics.csv";
    CsvWriter csv;
    csv.open(result.metrics_csv, cfg.deterministic);

    double train_loss = 0.0;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string eta, pcg, breakdown;

        if (is_lm) {
            ensure_clusters(iter);
            const auto report = solver::lm_step(state, data, cfg.lm, iter, rng);
            train_loss = report.loss_after;
            eta = fmt(report.eta);
            pcg = std::to_string(report.pcg_iterations);
            breakdown = report.breakdown ? "1" : "0";
        } else {
            const ParamVector grad =
                baselines::full_gradient(state, data.cameras, data.images, fo.loss, fo.ssim_weight);
            baselines::first_order_step(fo_state, state, grad, fo);
            train_loss =
                solver::batch_loss(state, data.cameras, data.images, fo.loss, fo.ssim_weight);
        }

        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();

        std::string psnr, ssim;
        const bool eval_now =
            !scene.test.cameras.empty() &&
            (iter == cfg.iterations - 1 || (cfg.eval_every > 0 && (iter + 1) % cfg.eval_every == 0));
        if (eval_now) {
            const auto report = evaluate_split(state, scene.test);
            psnr = fmt(report.psnr);
            ssim = fmt(report.ssim);
            result.final_test = report;
            write_test_renders(state, scene.test, cfg.out_dir / "renders", iter);
        }
        csv.row(iter, wall_ms, train_loss, psnr, ssim, eta, pcg, breakdown);
    }
    result.final_train_loss = train_loss;

    result.checkpoint = cfg.out_dir / "checkpoint.bin";
    save_checkpoint(result.checkpoint, state);

    nlohmann::json summary = config_json(cfg);
    summary["final_train_loss"] = result.final_train_loss;
    if (!scene.test.cameras.empty()) {
        summary["test_mse"] = result.final_test.mse;
        summary["test_psnr"] = result.final_test.psnr;
        summary["test_ssim"] = result.final_test.ssim;
    }
    std::ofstream(cfg.out_dir / "summary.json") << summary.dump(2) << "\n";
    return result;
}

metrics::MetricReport eval_run(const RunConfig& cfg, const std::filesystem::path& checkpoint) {
    if (cfg.threads > 0) set_thread_count(cfg.threads);
    const LoadedScene scene = load_scene(cfg);
    const GaussianSet state = load_checkpoint(checkpoint);
    const SceneDataset& split = scene.test.cameras.empty() ? scene.train : scene.test;
    const auto report = evaluate_split(state, split);

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        nlohmann::json summary = {{"checkpoint", checkpoint.string()},
                                  {"split", split.split},
                                  {"mse", report.mse},
                                  {"psnr", report.psnr},
                                  {"ssim", report.ssim}};
        std::ofstream(cfg.out_dir / "eval.json") << summary.dump(2) << "\n";
    }
    return report;
}

void datagen_run(const RunConfig& cfg) {
    std::mt19937_64 scene_rng(cfg.scene_seed);
    const ToyScene toy = generate_toy_scene(cfg.toy, scene_rng);
    std::filesystem::create_directories(cfg.out_dir);

    const auto write_split = [&](const SceneDataset& ds) {
        std::filesystem::create_directories(cfg.out_dir / ds.split);
        nlohmann::json root;
        root["camera_angle_x"] = 2.0 * std::atan(0.5 * ds.cameras[0].width / ds.cameras[0].fx);
        root["frames"] = nlohmann::json::array();
        for (size_t i = 0; i < ds.cameras.size(); ++i) {
            const Camera& cam = ds.cameras[i];
            // back out the camera-to-world matrix in the OpenGL convention
            const auto pos = cam.position();
            const auto& r = cam.world_to_cam;
            const double c2w[4][4] = {{r[0], -r[3], -r[6], pos.x},
                                      {r[1], -r[4], -r[7], pos.y},
                                      {r[2], -r[5], -r[8], pos.z},
                                      {0, 0, 0, 1}};
            char name[32];
            std::snprintf(name, sizeof(name), "r_%zu", i);
            write_png16(cfg.out_dir / ds.split / (std::string(name) + ".png"),
                        widen(ds.images[i]));

            nlohmann::json frame;
            frame["file_path"] = "./" + ds.split + "/" + name;
            frame["transform_matrix"] = c2w;
            root["frames"].push_back(frame);
        }
        std::ofstream(cfg.out_dir / ("transforms_" + ds.split + ".json")) << root.dump(2) << "\n";
    };
    write_split(toy.train);
    write_split(toy.test);
    save_checkpoint(cfg.out_dir / "ground_truth.bin", toy.ground_truth);
}

void render_run(const RunConfig& cfg, const std::filesystem::path& checkpoint) {
    if (cfg.threads > 0) set_thread_count(cfg.threads);
    const LoadedScene scene = load_scene(cfg);
    const GaussianSet state = load_checkpoint(checkpoint);
    const SceneDataset& split = scene.test.cameras.empty() ? scene.train : scene.test;

    std::filesystem::create_directories(cfg.out_dir);
    for (size_t i = 0; i < split.cameras.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "view%03zu.png", i);
        write_png8(cfg.out_dir / name, render::render_full(state, split.cameras[i]).image);
    }
}

}  // namespace splatlm::io
