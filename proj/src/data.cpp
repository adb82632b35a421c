#include "sparseprox/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sparseprox {

namespace {

[[noreturn]] void file_error(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

[[noreturn]] void line_error(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + " line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void magic_error(const std::string& path, std::uint32_t expected,
                              std::uint32_t found) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "bad IDX magic number: expected 0x%08x, found 0x%08x",
                expected, found);
  file_error(path, buf);
}

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) file_error(path, "truncated header");
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) file_error(images_path, "cannot open");
  if (const auto magic = read_be32(img, images_path); magic != 0x00000803u) {
    magic_error(images_path, 0x00000803u, magic);
  }
  const std::uint32_t count = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);
  if (count == 0 || rows == 0 || cols == 0) file_error(images_path, "empty image set");

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) file_error(labels_path, "cannot open");
  if (const auto magic = read_be32(lab, labels_path); magic != 0x00000801u) {
    magic_error(labels_path, 0x00000801u, magic);
  }
  if (const std::uint32_t lab_count = read_be32(lab, labels_path); lab_count != count) {
    file_error(labels_path, "label count does not match image count");
  }

  Dataset data;
  data.shape = InputShape{static_cast<int>(rows), static_cast<int>(cols), 1};
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  data.features = Matrix(count, pixels);
  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t n = 0; n < count; ++n) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
      file_error(images_path, "truncated image data");
    }
    for (std::size_t i = 0; i < pixels; ++i) data.features(n, i) = buf[i] / 255.0;
  }

  data.labels.resize(count);
  std::vector<unsigned char> lab_buf(count);
  if (!lab.read(reinterpret_cast<char*>(lab_buf.data()), static_cast<std::streamsize>(count))) {
    file_error(labels_path, "truncated label data");
  }
  int max_label = 0;
  for (std::uint32_t n = 0; n < count; ++n) {
    data.labels[n] = lab_buf[n];
    max_label = std::max(max_label, data.labels[n]);
  }
  data.num_classes = max_label + 1;
  return data;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) file_error(path, "cannot open");

  std::vector<int> labels;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        line_error(path, line_no, "cannot parse '" + field + "' as a number");
      }
    }
    if (values.size() < 2) line_error(path, line_no, "need a label and at least one feature");
    const double raw_label = values.front();
    const int label = static_cast<int>(raw_label);
    if (raw_label != label || label < 0) {
      line_error(path, line_no, "label must be a non-negative integer");
    }
    values.erase(values.begin());
    if (width == 0) {
      width = values.size();
    } else if (values.size() != width) {
      line_error(path, line_no, "row has " + std::to_string(values.size()) +
                                    " features, expected " + std::to_string(width));
    }
    labels.push_back(label);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) file_error(path, "no data rows");

  Dataset data;
  data.shape = InputShape{1, 1, static_cast<int>(width)};
  data.features = Matrix(rows.size(), width);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t i = 0; i < width; ++i) data.features(n, i) = rows[n][i];
  }
  data.labels = std::move(labels);
  data.num_classes = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  return data;
}

void save_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) file_error(path, "cannot open for writing");
  char buf[64];
  for (std::size_t n = 0; n < data.size(); ++n) {
    out << data.labels[n];
    for (std::size_t i = 0; i < data.features.cols(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", data.features(n, i));
      out << buf;
    }
    out << '\n';
  }
  if (!out) file_error(path, "write failed");
}

Dataset synthetic_classification(std::size_t samples, int informative, int noise,
                                 int num_classes, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("synthetic data needs at least one sample");
  if (informative <= 0 || noise < 0) {
    throw std::invalid_argument("synthetic data needs positive informative width");
  }
  if (num_classes < 2) throw std::invalid_argument("synthetic data needs at least two classes");

  const std::size_t width = static_cast<std::size_t>(informative) + noise;
  Dataset data;
  data.shape = InputShape{1, 1, static_cast<int>(width)};
  data.num_classes = num_classes;
  data.features = Matrix(samples, width);
  data.labels.resize(samples);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t n = 0; n < samples; ++n) {
    const int label = static_cast<int>(n % num_classes);
    data.labels[n] = label;
    const std::size_t hot = static_cast<std::size_t>(label % informative);
    for (std::size_t i = 0; i < width; ++i) {
      const double mean = (i == hot) ? 3.0 : 0.0;
      data.features(n, i) = mean + unit(rng);
    }
  }
  return data;
}

Matrix one_hot(const std::vector<int>& labels, int num_classes) {
  if (num_classes <= 0) throw std::invalid_argument("one_hot needs a positive class count");
  Matrix out(labels.size(), static_cast<std::size_t>(num_classes));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(labels[n]) +
                                  " outside 0.." + std::to_string(num_classes - 1));
    }
    out(n, static_cast<std::size_t>(labels[n])) = 1.0;
  }
  return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  }
  if (data.size() < 2) throw std::invalid_argument("need at least two samples to split");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t train_count =
      std::max<std::size_t>(1, static_cast<std::size_t>(train_fraction * data.size()));

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset part;
    part.shape = data.shape;
    part.num_classes = data.num_classes;
    part.features = Matrix(end - begin, data.features.cols());
    part.labels.resize(end - begin);
    for (std::size_t n = begin; n < end; ++n) {
      const std::size_t src = order[n];
      for (std::size_t i = 0; i < data.features.cols(); ++i) {
        part.features(n - begin, i) = data.features(src, i);
      }
      part.labels[n - begin] = data.labels[src];
    }
    return part;
  };
  return {take(0, train_count), take(train_count, data.size())};
}

}  // namespace sparseprox
