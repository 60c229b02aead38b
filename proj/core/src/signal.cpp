#include "plr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plr/dataset.hpp"
#include "plr/errors.hpp"

namespace plr {

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::EDA: return "EDA";
    case Channel::ECG: return "ECG";
    case Channel::EMG: return "EMG";
  }
  return "?";
}

std::optional<Channel> channel_from_string(std::string_view s) {
  for (Channel c : kAllChannels) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

ModalitySet ModalitySet::single(Channel c) {
  ModalitySet m;
  m.add(c);
  return m;
}

int ModalitySet::count() const {
  return static_cast<int>(present[0]) + static_cast<int>(present[1]) +
         static_cast<int>(present[2]);
}

std::vector<Channel> ModalitySet::channels() const {
  std::vector<Channel> out;
  for (Channel c : kAllChannels) {
    if (contains(c)) out.push_back(c);
  }
  return out;
}

std::string ModalitySet::name() const {
  if (count() == 3) return "all";
  std::string out;
  for (Channel c : channels()) {
    if (!out.empty()) out += '+';
    std::string_view s = to_string(c);
    for (char ch : s) out += static_cast<char>(std::tolower(ch));
  }
  return out.empty() ? "none" : out;
}

std::optional<ModalitySet> ModalitySet::from_name(std::string_view s) {
  std::string lower;
  for (char ch : s) lower += static_cast<char>(std::tolower(ch));
  if (lower == "all") return all();
  ModalitySet m;
  std::size_t start = 0;
  while (start <= lower.size()) {
    const std::size_t plus = lower.find('+', start);
    const std::string tok =
        lower.substr(start, plus == std::string::npos ? plus : plus - start);
    if (tok == "eda") {
      m.add(Channel::EDA);
    } else if (tok == "ecg") {
      m.add(Channel::ECG);
    } else if (tok == "emg") {
      m.add(Channel::EMG);
    } else {
      return std::nullopt;
    }
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  if (m.empty()) return std::nullopt;
  return m;
}

void validate_trace(const RawTrace& t) {
  if (t.samples.empty()) throw DataError("trace has no samples");
  if (t.sample_rate <= 0) throw DataError("trace sample rate must be > 0");
  for (double v : t.samples) {
    if (!std::isfinite(v)) throw DataError("trace contains a non-finite value");
  }
}

PreprocessConfig PreprocessConfig::defaults_for_rate(int sample_rate) {
  if (sample_rate <= 0) {
    throw ParameterError("sample rate must be > 0");
  }
  const int quarter = static_cast<int>(
      std::ceil(0.25 * static_cast<double>(sample_rate)));
  PreprocessConfig cfg;
  cfg.sg_window = std::max(3, quarter % 2 == 0 ? quarter + 1 : quarter);
  cfg.sg_order = 3;
  cfg.ds_window = std::max(1, quarter);
  cfg.overlap = 0.8;
  if (cfg.sg_order >= cfg.sg_window) cfg.sg_order = cfg.sg_window - 1;
  return cfg;
}

int PreprocessConfig::stride() const {
  const auto s = static_cast<int>(
      std::lround(static_cast<double>(ds_window) * (1.0 - overlap)));
  return std::max(1, s);
}

void PreprocessConfig::validate() const {
  if (sg_window < 3) throw ParameterError("sg_window must be >= 3");
  if (sg_window % 2 == 0) throw ParameterError("sg_window must be odd");
  if (sg_order < 0) throw ParameterError("sg_order must be >= 0");
  if (sg_order >= sg_window) {
    throw ParameterError("sg_order must be < sg_window");
  }
  if (ds_window < 1) throw ParameterError("ds_window must be >= 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw ParameterError("overlap must lie in [0, 1)");
  }
}

std::vector<double> savgol_center_weights(int window, int order) {
  if (window < 3 || window % 2 == 0) {
    throw ParameterError("savitzky_golay: window must be odd and >= 3");
  }
  if (order < 0 || order >= window) {
    throw ParameterError("savitzky_golay: order must satisfy 0 <= order < window");
  }
  const int half = window / 2;
  const int m = order + 1;

  // Normal equations G a = A^T e_center for the polynomial fit over local
  // positions -half..half. The center weight vector is w = A (G^-1 e_0):
  // w_i = sum_j c_j * i^j where c solves G c = e_0 (value of the fit at 0).
  std::vector<double> gram(static_cast<std::size_t>(m) * m, 0.0);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      double s = 0.0;
      for (int i = -half; i <= half; ++i) {
        s += std::pow(static_cast<double>(i), r + c);
      }
      gram[static_cast<std::size_t>(r) * m + c] = s;
    }
  }
  std::vector<double> rhs(m, 0.0);
  rhs[0] = 1.0;  // evaluate fitted polynomial at the window center

  // Gaussian elimination with partial pivoting; m is tiny.
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(gram[static_cast<std::size_t>(r) * m + col]) >
          std::abs(gram[static_cast<std::size_t>(pivot) * m + col])) {
        pivot = r;
      }
    }
    if (gram[static_cast<std::size_t>(pivot) * m + col] == 0.0) {
      throw ParameterError("savitzky_golay: singular fit (window too small)");
    }
    if (pivot != col) {
      for (int c = 0; c < m; ++c) {
        std::swap(gram[static_cast<std::size_t>(pivot) * m + c],
                  gram[static_cast<std::size_t>(col) * m + c]);
      }
      std::swap(rhs[pivot], rhs[col]);
    }
    const double d = gram[static_cast<std::size_t>(col) * m + col];
    for (int r = col + 1; r < m; ++r) {
      const double f = gram[static_cast<std::size_t>(r) * m + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < m; ++c) {
        gram[static_cast<std::size_t>(r) * m + c] -=
            f * gram[static_cast<std::size_t>(col) * m + c];
      }
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> coeff(m, 0.0);
  for (int r = m - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int c = r + 1; c < m; ++c) {
      s -= gram[static_cast<std::size_t>(r) * m + c] * coeff[c];
    }
    coeff[r] = s / gram[static_cast<std::size_t>(r) * m + r];
  }

  std::vector<double> weights(static_cast<std::size_t>(window), 0.0);
  for (int i = -half; i <= half; ++i) {
    double w = 0.0;
    double p = 1.0;
    for (int j = 0; j < m; ++j) {
      w += coeff[j] * p;
      p *= static_cast<double>(i);
    }
    weights[static_cast<std::size_t>(i + half)] = w;
  }
  return weights;
}

namespace {

// Mirror padding: reflection about the boundary sample without repeating it.
inline std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  while (i < 0 || i >= len) {
    if (i < 0) i = -i;
    if (i >= len) i = 2 * (len - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

RawTrace savitzky_golay(const RawTrace& trace, int window, int order) {
  validate_trace(trace);
  if (window % 2 == 0) {
    throw ParameterError("savitzky_golay: window must be odd");
  }
  if (window < 3 || static_cast<std::size_t>(window) > trace.samples.size()) {
    throw ParameterError(
        "savitzky_golay: window must satisfy 3 <= window <= trace length");
  }
  if (order >= window) {
    throw ParameterError("savitzky_golay: order must be < window");
  }
  const std::vector<double> w = savgol_center_weights(window, order);
  const int half = window / 2;
  const std::size_t n = trace.samples.size();

  RawTrace out;
  out.channel = trace.channel;
  out.sample_rate = trace.sample_rate;
  out.samples.resize(n);
  const double* x = trace.samples.data();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const auto base = static_cast<std::ptrdiff_t>(i) - half;
    if (base >= 0 &&
        base + window <= static_cast<std::ptrdiff_t>(n)) {
      for (int k = 0; k < window; ++k) {
        acc += w[static_cast<std::size_t>(k)] *
               x[static_cast<std::size_t>(base + k)];
      }
    } else {
      for (int k = 0; k < window; ++k) {
        acc += w[static_cast<std::size_t>(k)] * x[mirror_index(base + k, n)];
      }
    }
    out.samples[i] = acc;
  }
  return out;
}

NormalizedTrace minmax_normalize(const RawTrace& trace) {
  validate_trace(trace);
  const auto [mn_it, mx_it] =
      std::minmax_element(trace.samples.begin(), trace.samples.end());
  const double mn = *mn_it;
  const double mx = *mx_it;

  NormalizedTrace out;
  out.trace.channel = trace.channel;
  out.trace.sample_rate = trace.sample_rate;
  out.trace.samples.resize(trace.samples.size());
  if (mx == mn) {
    out.degenerate = true;
    std::fill(out.trace.samples.begin(), out.trace.samples.end(), 0.0);
    return out;
  }
  const double scale = 1.0 / (mx - mn);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out.trace.samples[i] = (trace.samples[i] - mn) * scale;
  }
  return out;
}

std::size_t downsample_output_length(std::size_t len, int ds_window,
                                     double overlap) {
  if (ds_window < 1) throw ParameterError("ds_window must be >= 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw ParameterError("overlap must lie in [0, 1)");
  }
  if (static_cast<std::size_t>(ds_window) > len) {
    throw ParameterError("ds_window exceeds trace length");
  }
  const auto stride = static_cast<std::size_t>(std::max<long>(
      1, std::lround(static_cast<double>(ds_window) * (1.0 - overlap))));
  return (len - static_cast<std::size_t>(ds_window)) / stride + 1;
}

std::vector<double> downsample_moving_average(const RawTrace& trace,
                                              int ds_window, double overlap) {
  validate_trace(trace);
  const std::size_t n =
      downsample_output_length(trace.samples.size(), ds_window, overlap);
  const auto stride = static_cast<std::size_t>(std::max<long>(
      1, std::lround(static_cast<double>(ds_window) * (1.0 - overlap))));
  const auto w = static_cast<std::size_t>(ds_window);
  const double inv = 1.0 / static_cast<double>(w);

  std::vector<double> out(n);
  const double* x = trace.samples.data();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = i * stride;
    double acc = 0.0;
    for (std::size_t k = 0; k < w; ++k) acc += x[begin + k];
    out[i] = acc * inv;
  }
  return out;
}

FeatureVector build_feature_vector(const SignalWindow& window,
                                   const ModalitySet& modalities,
                                   const PreprocessConfig& config,
                                   const ContextFeatures* context) {
  if (modalities.empty()) {
    throw ParameterError("build_feature_vector: modality set is empty");
  }
  config.validate();

  FeatureVector fv;
  for (Channel c : modalities.channels()) {
    const auto it = window.channels.find(c);
    if (it == window.channels.end()) {
      throw DataError(std::string("window ") + window.window_id +
                      " is missing channel " + std::string(to_string(c)));
    }
    const RawTrace filtered =
        savitzky_golay(it->second, config.sg_window, config.sg_order);
    const NormalizedTrace normed = minmax_normalize(filtered);
    std::vector<double> block = downsample_moving_average(
        normed.trace, config.ds_window, config.overlap);
    // Averages of values in [0, 1] stay in [0, 1]; clamp away rounding dust.
    for (double& v : block) v = std::clamp(v, 0.0, 1.0);
    fv.values.insert(fv.values.end(), block.begin(), block.end());
  }
  fv.signal_components = fv.values.size();
  if (context != nullptr) {
    const auto ctx = context->values();
    fv.values.insert(fv.values.end(), ctx.begin(), ctx.end());
  }
  return fv;
}

}  // namespace plr
