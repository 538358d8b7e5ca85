#include "splatlm/io/scene_gen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "splatlm/render/rasterizer.hpp"

namespace splatlm::io {

Camera ring_camera(double angle, double radius, double height, int image_size) {
    const Vec3<double> pos{radius * std::cos(angle), height, radius * std::sin(angle)};
    const Vec3<double> target{0.0, 0.0, 0.0};

    Vec3<double> fwd = target - pos;
    const double fn = std::sqrt(dot(fwd, fwd));
    fwd = {fwd.x / fn, fwd.y / fn, fwd.z / fn};
    const Vec3<double> world_up{0.0, 1.0, 0.0};
    Vec3<double> right = cross(fwd, world_up);
    const double rn = std::sqrt(dot(right, right));
    right = {right.x / rn, right.y / rn, right.z / rn};
    const Vec3<double> down = cross(fwd, right);

    Camera cam;
    cam.world_to_cam = {right.x, right.y, right.z, down.x, down.y, down.z, fwd.x, fwd.y, fwd.z};
    for (int r = 0; r < 3; ++r) {
        const double* row = cam.world_to_cam.data() + 3 * r;
        cam.translation[r] = -(row[0] * pos.x + row[1] * pos.y + row[2] * pos.z);
    }
    cam.width = cam.height = image_size;
    const double fov_x = 50.0 * std::numbers::pi / 180.0;
    cam.fx = cam.fy = 0.5 * image_size / std::tan(0.5 * fov_x);
    cam.cx = cam.cy = 0.5 * image_size;
    cam.validate();
    return cam;
}

ToyScene generate_toy_scene(const ToySceneConfig& cfg, std::mt19937_64& rng) {
    if (cfg.gaussians < 1) throw std::invalid_argument("toy scene needs at least one Gaussian");

    ToyScene scene;
    GaussianSet& gt = scene.ground_truth;
    gt = GaussianSet::zeros(cfg.gaussians);

    // Well-conditioned Gaussians with margins away from the render gates:
    // mid-range opacity, colors that keep channels strictly inside (0, 1).
    std::uniform_real_distribution<double> upos(-0.8, 0.8);
    std::uniform_real_distribution<double> uscale(std::log(0.12), std::log(0.35));
    std::uniform_real_distribution<double> uquat(-1.0, 1.0);
    std::uniform_real_distribution<double> uopacity(0.4, 0.9);
    std::uniform_real_distribution<double> ucolor(-1.2, 1.2);

    for (int i = 0; i < cfg.gaussians; ++i) {
        for (int c = 0; c < 3; ++c) {
            gt.means[3 * i + c] = upos(rng);
            gt.log_scales[3 * i + c] = uscale(rng);
            gt.colors[3 * i + c] = ucolor(rng);
        }
        double q[4], norm = 0.0;
        do {
            norm = 0.0;
            for (double& v : q) {
                v = uquat(rng);
                norm += v * v;
            }
        } while (norm < 1e-4);
        for (int c = 0; c < 4; ++c) gt.rotations[4 * i + c] = q[c];
        const double o = uopacity(rng);
        gt.opacity_logits[i] = std::log(o / (1.0 - o));
    }
    gt.renormalize_rotations();

    const auto make_split = [&](int count, double phase, double height, const char* name) {
        SceneDataset ds;
        ds.split = name;
        for (int i = 0; i < count; ++i) {
            const double angle = phase + 2.0 * std::numbers::pi * i / count;
            ds.cameras.push_back(ring_camera(angle, 3.2, height, cfg.image_size));
            ds.images.push_back(narrow(render::render_full(gt, ds.cameras.back()).image));
        }
        return ds;
    };
    scene.train = make_split(cfg.train_cameras, 0.0, 1.1, "train");
    scene.test = make_split(cfg.test_cameras, 0.37, 1.6, "test");
    return scene;
}

}  // namespace splatlm::io
