#include "splatlm/io/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace splatlm::io {

namespace {

[[noreturn]] void load_error(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error("dataset load failed (" + path.string() + "): " + what);
}

// NeRF-synthetic transform matrices are camera-to-world with OpenGL axes
// (x right, y up, z backward). Our camera frame is x right, y down,
// z forward, so the y/z axes flip sign.
Camera camera_from_c2w(const double c2w[16], double camera_angle_x, int width, int height) {
    Camera cam;
    const double right[3] = {c2w[0], c2w[4], c2w[8]};
    const double up[3] = {c2w[1], c2w[5], c2w[9]};
    const double back[3] = {c2w[2], c2w[6], c2w[10]};
    const double origin[3] = {c2w[3], c2w[7], c2w[11]};

    for (int i = 0; i < 3; ++i) {
        cam.world_to_cam[i] = right[i];
        cam.world_to_cam[3 + i] = -up[i];
        cam.world_to_cam[6 + i] = -back[i];
    }
    for (int r = 0; r < 3; ++r) {
        double t = 0.0;
        for (int i = 0; i < 3; ++i) t += cam.world_to_cam[3 * r + i] * origin[i];
        cam.translation[r] = -t;
    }

    cam.width = width;
    cam.height = height;
    cam.fx = cam.fy = 0.5 * width / std::tan(0.5 * camera_angle_x);
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.validate();
    return cam;
}

}  // namespace

SceneDataset load_nerf_synthetic(const std::filesystem::path& dir, const std::string& split) {
    const std::filesystem::path json_path = dir / ("transforms_" + split + ".json");
    std::ifstream in(json_path);
    if (!in) load_error(json_path, "missing transforms file");

    nlohmann::json root;
    try {
        in >> root;
    } catch (const std::exception& e) {
        load_error(json_path, e.what());
    }
    if (!root.contains("camera_angle_x") || !root.contains("frames"))
        load_error(json_path, "missing camera_angle_x or frames");
    const double angle_x = root["camera_angle_x"].get<double>();

    SceneDataset ds;
    ds.split = split;
    for (const auto& frame : root["frames"]) {
        std::string file = frame.at("file_path").get<std::string>();
        std::filesystem::path img_path = dir / file;
        if (!img_path.has_extension()) img_path += ".png";

        ImageF img = read_png(img_path);
        if (!ds.images.empty() &&
            (img.width != ds.images.front().width || img.height != ds.images.front().height))
            load_error(img_path, "image dimensions differ within the split");

        const auto& tm = frame.at("transform_matrix");
        double c2w[16];
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) c2w[4 * r + c] = tm.at(r).at(c).get<double>();

        ds.cameras.push_back(camera_from_c2w(c2w, angle_x, img.width, img.height));
        ds.images.push_back(std::move(img));
    }
    if (ds.cameras.empty()) load_error(json_path, "no frames");
    return ds;
}

PointCloud load_points_xyzrgb(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open point list: " + path.string());

    PointCloud pc;
    std::string line;
    double max_rgb = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double x, y, z, r, g, b;
        if (!(ss >> x >> y >> z >> r >> g >> b))
            throw std::runtime_error("bad xyzrgb line in " + path.string() + ": " + line);
        pc.xyz.insert(pc.xyz.end(), {x, y, z});
        pc.rgb.insert(pc.rgb.end(), {r, g, b});
        max_rgb = std::max({max_rgb, r, g, b});
    }
    if (pc.xyz.empty()) throw std::runtime_error("empty point list: " + path.string());
    if (max_rgb > 1.0)
        for (double& v : pc.rgb) v /= 255.0;
    return pc;
}

GaussianSet init_from_points(const PointCloud& points) {
    const int n = static_cast<int>(points.xyz.size() / 3);
    GaussianSet g = GaussianSet::zeros(n);
    g.means = points.xyz;

    double lo[3] = {points.xyz[0], points.xyz[1], points.xyz[2]};
    double hi[3] = {points.xyz[0], points.xyz[1], points.xyz[2]};
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], points.xyz[3 * i + c]);
            hi[c] = std::max(hi[c], points.xyz[3 * i + c]);
        }
    const double extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2], 1e-3});
    const double scale = std::log(0.5 * extent * std::pow(static_cast<double>(n), -1.0 / 3.0));
    const double opacity_logit = std::log(0.1 / 0.9);

    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            g.log_scales[3 * i + c] = scale;
            g.colors[3 * i + c] = (points.rgb[3 * i + c] - 0.5) / kColorC0;
        }
        g.opacity_logits[i] = opacity_logit;
    }
    return g;
}

GaussianSet random_init(int count, const Vec3<double>& cube_min, const Vec3<double>& cube_max,
                        std::mt19937_64& rng) {
    if (count < 1) throw std::invalid_argument("random_init: count must be at least 1");
    GaussianSet g = GaussianSet::zeros(count);

    std::uniform_real_distribution<double> ux(cube_min.x, cube_max.x);
    std::uniform_real_distribution<double> uy(cube_min.y, cube_max.y);
    std::uniform_real_distribution<double> uz(cube_min.z, cube_max.z);
    // valid level-0 coefficient range: channel = 0.5 + C0 c stays in [0, 1]
    const double coeff_max = 0.5 / kColorC0;
    std::uniform_real_distribution<double> ucolor(-coeff_max, coeff_max);

    const double edge =
        std::max({cube_max.x - cube_min.x, cube_max.y - cube_min.y, cube_max.z - cube_min.z});
    const double scale = std::log(0.5 * edge * std::pow(static_cast<double>(count), -1.0 / 3.0));
    const double opacity_logit = std::log(0.1 / 0.9);  // sigmoid^-1(0.1)

    for (int i = 0; i < count; ++i) {
        g.means[3 * i] = ux(rng);
        g.means[3 * i + 1] = uy(rng);
        g.means[3 * i + 2] = uz(rng);
        for (int c = 0; c < 3; ++c) {
            g.log_scales[3 * i + c] = scale;
            g.colors[3 * i + c] = ucolor(rng);
        }
        g.opacity_logits[i] = opacity_logit;
    }
    return g;
}

}  // namespace splatlm::io
