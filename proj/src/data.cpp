#include "neurolgp/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "neurolgp/errors.hpp"

namespace nlgp {

void DataConfig::validate() const {
  if (n_classes < 2) throw ConfigError("dataset needs at least 2 classes");
  if (n_classes > 3) throw ConfigError("dataset supports at most 3 shape classes");
  if (shape.height < 4 || shape.width < 4 || shape.channels < 1)
    throw ConfigError("image shape must be at least 4x4x1");
  if (base_count < 4) throw ConfigError("base_count must be >= 4");
  if (imbalance < 1.0) throw ConfigError("imbalance must be >= 1");
  if (noise < 0.0) throw ConfigError("noise must be >= 0");
  if (!(min_scale > 0.0 && min_scale <= max_scale)) throw ConfigError("invalid scale range");
  if (max_shift < 0.0) throw ConfigError("max_shift must be >= 0");
  if (!(train > 0.0) || !(validation > 0.0) || !(test1 > 0.0) || !(test2 >= 0.0) || train >= 1.0)
    throw ConfigError("split fractions must be positive and train < 1");
}

std::vector<int> DataConfig::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(n_classes), base_count);
  counts[0] = static_cast<int>(std::lround(base_count * imbalance));
  return counts;
}

std::vector<std::size_t> Dataset::indices(SplitId id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == id) out.push_back(i);
  return out;
}

namespace {

bool inside(int cls, double x, double y, double s) {
  switch (cls) {
    case 0:  // disc
      return x * x + y * y <= s * s;
    case 1: {  // square of roughly the disc's area
      const double half = s * 0.886;
      return std::abs(x) <= half && std::abs(y) <= half;
    }
    default: {  // cross
      const double arm = s / 3.0;
      return (std::abs(x) <= s && std::abs(y) <= arm) || (std::abs(x) <= arm && std::abs(y) <= s);
    }
  }
}

void render(int cls, const DataConfig& cfg, Rng& rng, double* out) {
  constexpr int kSuper = 4;
  const double cx = rng.uniform(-cfg.max_shift, cfg.max_shift);
  const double cy = rng.uniform(-cfg.max_shift, cfg.max_shift);
  const double scale = rng.uniform(cfg.min_scale, cfg.max_scale);
  const double angle = rng.uniform(0.0, M_PI);
  const double contrast = rng.uniform(0.75, 1.0);
  const double c = std::cos(angle), s = std::sin(angle);
  const int H = cfg.shape.height, W = cfg.shape.width, C = cfg.shape.channels;
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      int hits = 0;
      for (int a = 0; a < kSuper; ++a) {
        for (int b = 0; b < kSuper; ++b) {
          const double py = 2.0 * (i + (a + 0.5) / kSuper) / H - 1.0 - cy;
          const double px = 2.0 * (j + (b + 0.5) / kSuper) / W - 1.0 - cx;
          const double rx = c * px + s * py;
          const double ry = -s * px + c * py;
          hits += inside(cls, rx, ry, scale);
        }
      }
      const double coverage = static_cast<double>(hits) / (kSuper * kSuper);
      for (int ch = 0; ch < C; ++ch) {
        const double v = contrast * coverage + cfg.noise * rng.normal();
        out[(static_cast<std::size_t>(i) * W + j) * C + ch] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
}

}  // namespace

Dataset generate(const DataConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Dataset ds;
  ds.shape = cfg.shape;
  ds.n_classes = cfg.n_classes;
  ds.seed = seed;

  const auto counts = cfg.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    ds.labels.insert(ds.labels.end(), static_cast<std::size_t>(counts[c]), static_cast<int>(c));
  Rng order_rng(derive_seed(seed, {hash_string("order")}));
  order_rng.shuffle(ds.labels.begin(), ds.labels.end());

  const std::size_t dim = ds.dim();
  ds.images.resize(ds.labels.size() * dim);
  Rng pixel_rng(derive_seed(seed, {hash_string("pixels")}));
  for (std::size_t i = 0; i < ds.labels.size(); ++i)
    render(ds.labels[i], cfg, pixel_rng, ds.images.data() + i * dim);

  // Stratified split. The non-training remainder of each class is dealt to
  // the split with the largest deficit against its share; the deficits carry
  // over between classes so the totals stay within one of their targets.
  ds.split.assign(ds.labels.size(), SplitId::Train);
  const std::array<SplitId, 3> rest{SplitId::Validation, SplitId::Test1, SplitId::Test2};
  const std::array<double, 3> weight{cfg.validation, cfg.test1, cfg.test2};
  const double weight_sum = weight[0] + weight[1] + weight[2];
  std::array<double, 3> assigned{0, 0, 0};
  double dealt = 0.0;
  Rng split_rng(derive_seed(seed, {hash_string("split")}));
  for (int c = 0; c < cfg.n_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
      if (ds.labels[i] == c) members.push_back(i);
    split_rng.shuffle(members.begin(), members.end());
    const auto n_train = static_cast<std::size_t>(std::lround(cfg.train * static_cast<double>(members.size())));
    for (std::size_t t = n_train; t < members.size(); ++t) {
      dealt += 1.0;
      std::size_t pick = 0;
      double best = -1e300;
      for (std::size_t s = 0; s < 3; ++s) {
        const double deficit = dealt * weight[s] / weight_sum - assigned[s];
        if (deficit > best + 1e-12) {
          best = deficit;
          pick = s;
        }
      }
      assigned[pick] += 1.0;
      ds.split[members[t]] = rest[pick];
    }
  }
  return ds;
}

Samples select(const Dataset& ds, SplitId id) {
  Samples s;
  s.dim = ds.dim();
  for (auto i : ds.indices(id)) {
    s.features.insert(s.features.end(), ds.images.begin() + static_cast<std::ptrdiff_t>(i * s.dim),
                      ds.images.begin() + static_cast<std::ptrdiff_t>((i + 1) * s.dim));
    s.labels.push_back(ds.labels[i]);
  }
  return s;
}

Samples smote(const Samples& in, int k, Rng& rng, std::vector<SyntheticOrigin>* origins) {
  if (k < 1) throw std::invalid_argument("smote: k must be >= 1");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < in.size(); ++i) by_class[in.labels[i]].push_back(i);
  std::size_t majority = 0;
  for (const auto& [c, members] : by_class) majority = std::max(majority, members.size());

  Samples out = in;
  if (origins) origins->clear();
  const std::size_t dim = in.dim;
  for (const auto& [cls, members] : by_class) {
    if (members.size() == majority) continue;
    if (members.size() <= static_cast<std::size_t>(k))
      throw InsufficientSamples("smote: class " + std::to_string(cls) + " has " +
                                std::to_string(members.size()) + " samples, needs more than k=" +
                                std::to_string(k));
    // k nearest same-class neighbours of every member (brute force).
    std::vector<std::vector<std::size_t>> knn(members.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < members.size(); ++a) {
      dist.clear();
      const double* xa = in.row(members[a]);
      for (std::size_t b = 0; b < members.size(); ++b) {
        if (a == b) continue;
        const double* xb = in.row(members[b]);
        double d = 0.0;
        for (std::size_t j = 0; j < dim; ++j) d += (xa[j] - xb[j]) * (xa[j] - xb[j]);
        dist.emplace_back(d, members[b]);
      }
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      for (int t = 0; t < k; ++t) knn[a].push_back(dist[static_cast<std::size_t>(t)].second);
    }
    const std::size_t need = majority - members.size();
    for (std::size_t t = 0; t < need; ++t) {
      const std::size_t a = t % members.size();
      const std::size_t parent = members[a];
      const std::size_t nb = knn[a][rng.index(static_cast<std::size_t>(k))];
      const double u = rng.uniform();
      const double* xp = in.row(parent);
      const double* xn = in.row(nb);
      for (std::size_t j = 0; j < dim; ++j) out.features.push_back(xp[j] + u * (xn[j] - xp[j]));
      out.labels.push_back(cls);
      if (origins) origins->push_back({parent, nb, u});
    }
  }
  return out;
}

PreparedData prepare(const Dataset& ds, int smote_k, std::uint64_t seed) {
  PreparedData p;
  p.shape = ds.shape;
  p.n_classes = ds.n_classes;
  Rng rng(derive_seed(seed, {hash_string("smote")}));
  p.train = smote(select(ds, SplitId::Train), smote_k, rng);
  p.validation = select(ds, SplitId::Validation);
  p.test1 = select(ds, SplitId::Test1);
  p.test2 = select(ds, SplitId::Test2);
  return p;
}

namespace {

constexpr char kDatasetMagic[4] = {'N', 'L', 'G', 'D'};
constexpr std::uint32_t kDatasetVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("dataset file truncated");
  return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os.write(kDatasetMagic, 4);
  put(os, kDatasetVersion);
  put<std::int32_t>(os, ds.shape.height);
  put<std::int32_t>(os, ds.shape.width);
  put<std::int32_t>(os, ds.shape.channels);
  put<std::int32_t>(os, ds.n_classes);
  put<std::uint64_t>(os, ds.size());
  put<std::uint64_t>(os, ds.seed);
  os.write(reinterpret_cast<const char*>(ds.images.data()),
           static_cast<std::streamsize>(ds.images.size() * sizeof(double)));
  for (int l : ds.labels) put<std::int32_t>(os, l);
  for (auto s : ds.split) put<std::uint8_t>(os, static_cast<std::uint8_t>(s));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kDatasetMagic, 4) != 0) throw Error("not a dataset container");
  if (get<std::uint32_t>(is) != kDatasetVersion) throw Error("unsupported dataset version");
  Dataset ds;
  ds.shape.height = get<std::int32_t>(is);
  ds.shape.width = get<std::int32_t>(is);
  ds.shape.channels = get<std::int32_t>(is);
  ds.n_classes = get<std::int32_t>(is);
  const auto count = get<std::uint64_t>(is);
  ds.seed = get<std::uint64_t>(is);
  ds.images.resize(count * ds.dim());
  is.read(reinterpret_cast<char*>(ds.images.data()),
          static_cast<std::streamsize>(ds.images.size() * sizeof(double)));
  if (!is) throw Error("dataset file truncated");
  ds.labels.resize(count);
  for (auto& l : ds.labels) l = get<std::int32_t>(is);
  ds.split.resize(count);
  for (auto& s : ds.split) {
    const auto v = get<std::uint8_t>(is);
    if (v > 3) throw Error("invalid split id in dataset file");
    s = static_cast<SplitId>(v);
  }
  return ds;
}

}  // namespace nlgp
