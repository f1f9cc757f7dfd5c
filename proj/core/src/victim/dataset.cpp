#include "rtia/victim/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "rtia/world/render.hpp"

namespace rtia::victim {

namespace fs = std::filesystem;
using world::SceneObject;

Dataset generate_dataset(int n, const world::WorldConfig& cfg, uint64_t seed) {
  Dataset ds;
  ds.frame_size = cfg.frame_size;
  nn::RngStream root(seed);
  for (int i = 0; i < n; ++i) {
    nn::RngStream rng = root.child(static_cast<uint64_t>(i));
    world::Scene scene;
    scene.background_seed = rng.next_u64();
    world::VehicleState view;
    view.lat = rng.uniform(-3.0, 3.0);
    view.fwd = rng.uniform(-2.0, 2.0);

    const int count = 1 + static_cast<int>(rng.uniform_index(4));
    for (int o = 0; o < count; ++o) {
      SceneObject obj;
      // placement is rejection-sampled so projected boxes stay separated
      for (int attempt = 0; attempt < 16; ++attempt) {
        const double r = rng.uniform();
        obj.class_id =
            r < 0.5 ? world::kClassCar : (r < 0.75 ? world::kClassTruck : world::kClassPerson);
        obj.lat = rng.uniform(-14.0, 14.0);
        obj.fwd = rng.uniform(7.0, 45.0);
        double w0 = 3.5, h0 = 2.0;
        if (obj.class_id == world::kClassTruck) {
          w0 = 4.8;
          h0 = 3.0;
        } else if (obj.class_id == world::kClassPerson) {
          w0 = 0.7;
          h0 = 1.9;
        }
        obj.width = w0 * rng.uniform(0.8, 1.2);
        obj.height = h0 * rng.uniform(0.8, 1.2);
        world::Scene probe = scene;
        probe.objects.push_back(obj);
        auto tbs = world::truth_boxes(view, probe, cfg);
        bool separated = true;
        if (tbs.back().visible) {
          for (std::size_t j = 0; j + 1 < tbs.size(); ++j)
            if (tbs[j].visible && iou(tbs[j].box, tbs.back().box) > 0.2) separated = false;
        }
        if (separated) break;
      }
      std::array<double, 3> base = obj.class_id == world::kClassCar
                                       ? std::array<double, 3>{0.85, 0.15, 0.12}
                                   : obj.class_id == world::kClassTruck
                                       ? std::array<double, 3>{0.15, 0.35, 0.85}
                                       : std::array<double, 3>{0.20, 0.80, 0.25};
      for (auto& c : base) c = std::clamp(c + rng.uniform(-0.08, 0.08), 0.02, 0.98);
      obj.color = base;
      scene.objects.push_back(obj);
    }

    LabeledFrame item;
    item.frame = world::render(view, scene, cfg);
    const double min_size = 2.0 / cfg.frame_size;  // sub-2px boxes are not usable truth
    for (const auto& tb : world::truth_boxes(view, scene, cfg)) {
      if (!tb.visible) continue;
      if (tb.box.w < min_size || tb.box.h < min_size) continue;
      item.labels.push_back(tb.box);
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "frames");
  {
    std::ofstream meta(fs::path(dir) / "meta.txt");
    meta << "count = " << ds.items.size() << "\n";
    meta << "frame_size = " << ds.frame_size << "\n";
  }
  std::ofstream labels(fs::path(dir) / "labels.csv");
  labels << "frame,class,cx,cy,w,h\n";
  char buf[160];
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%06zu", i);
    const std::string name = std::string(buf) + ".bin";
    std::ofstream bin(fs::path(dir) / "frames" / name, std::ios::binary);
    const auto& frame = ds.items[i].frame;
    std::vector<float> f32(static_cast<std::size_t>(frame.size()));
    for (int64_t j = 0; j < frame.size(); ++j) f32[static_cast<std::size_t>(j)] = static_cast<float>(frame[j]);
    bin.write(reinterpret_cast<const char*>(f32.data()),
              static_cast<std::streamsize>(f32.size() * sizeof(float)));
    for (const auto& b : ds.items[i].labels) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.10g,%.10g,%.10g,%.10g", i, b.class_id, b.cx, b.cy,
                    b.w, b.h);
      labels << buf << "\n";
    }
  }
}

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  std::size_t count = 0;
  {
    std::ifstream meta(fs::path(dir) / "meta.txt");
    if (!meta) throw std::runtime_error("dataset: missing meta.txt in " + dir);
    std::string key, eq;
    while (meta >> key >> eq) {
      if (key == "count") meta >> count;
      else if (key == "frame_size") meta >> ds.frame_size;
      else { std::string skip; meta >> skip; }
    }
  }
  const int n = ds.frame_size;
  ds.items.resize(count);
  char buf[160];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof(buf), "%06zu", i);
    std::ifstream bin(fs::path(dir) / "frames" / (std::string(buf) + ".bin"), std::ios::binary);
    if (!bin) throw std::runtime_error("dataset: missing frame " + std::to_string(i));
    std::vector<float> f32(static_cast<std::size_t>(3) * n * n);
    bin.read(reinterpret_cast<char*>(f32.data()),
             static_cast<std::streamsize>(f32.size() * sizeof(float)));
    if (!bin) throw std::runtime_error("dataset: truncated frame " + std::to_string(i));
    ds.items[i].frame = nn::Tensor({3, n, n});
    for (std::size_t j = 0; j < f32.size(); ++j)
      ds.items[i].frame[static_cast<int64_t>(j)] = f32[j];
  }
  std::ifstream labels(fs::path(dir) / "labels.csv");
  if (!labels) throw std::runtime_error("dataset: missing labels.csv in " + dir);
  std::string line;
  std::getline(labels, line);  // header
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    std::size_t frame_id = 0;
    BBox b;
    if (std::sscanf(line.c_str(), "%zu,%d,%lf,%lf,%lf,%lf", &frame_id, &b.class_id, &b.cx, &b.cy,
                    &b.w, &b.h) != 6)
      throw std::runtime_error("dataset: bad label row: " + line);
    b.conf = 1.0;
    if (frame_id >= count) throw std::runtime_error("dataset: label frame id out of range");
    ds.items[frame_id].labels.push_back(b);
  }
  return ds;
}

}  // namespace rtia::victim
