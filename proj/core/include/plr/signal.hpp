#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plr {

enum class Channel { EDA, ECG, EMG };

inline constexpr std::array<Channel, 3> kAllChannels = {
    Channel::EDA, Channel::ECG, Channel::EMG};

std::string_view to_string(Channel c);
std::optional<Channel> channel_from_string(std::string_view s);

// A subset of the three biopotential channels. Iteration and feature
// concatenation always follow the fixed order EDA, ECG, EMG.
struct ModalitySet {
  std::array<bool, 3> present{false, false, false};

  static ModalitySet all() { return {{true, true, true}}; }
  static ModalitySet single(Channel c);

  bool contains(Channel c) const {
    return present[static_cast<std::size_t>(c)];
  }
  void add(Channel c) { present[static_cast<std::size_t>(c)] = true; }
  int count() const;
  bool empty() const { return count() == 0; }
  std::vector<Channel> channels() const;  // in fixed EDA, ECG, EMG order
  // "eda", "ecg", "emg", "eda+ecg", ..., "all" for the full set.
  std::string name() const;
  static std::optional<ModalitySet> from_name(std::string_view s);

  friend bool operator==(const ModalitySet&, const ModalitySet&) = default;
};

// One raw biopotential trace: a single channel sampled at a fixed rate.
struct RawTrace {
  Channel channel = Channel::EDA;
  int sample_rate = 0;  // samples per second
  std::vector<double> samples;

  friend bool operator==(const RawTrace&, const RawTrace&) = default;
};

// Throws DataError unless samples are non-empty and finite and the rate is
// positive.
void validate_trace(const RawTrace& t);

// Parameters of the filter -> normalize -> downsample pipeline.
//
// Defaults derive from the sample rate: both windows cover 0.25 s, the
// smoothing window rounded up to the next odd count, polynomial order 3,
// downsampling overlap 0.8.
struct PreprocessConfig {
  int sg_window = 0;     // odd sample count >= 3
  int sg_order = 3;      // polynomial degree, < sg_window
  int ds_window = 0;     // sliding window length in samples, >= 1
  double overlap = 0.8;  // fraction in [0, 1)

  static PreprocessConfig defaults_for_rate(int sample_rate);

  // max(1, round(ds_window * (1 - overlap)))
  int stride() const;

  void validate() const;  // throws ParameterError

  friend bool operator==(const PreprocessConfig&,
                         const PreprocessConfig&) = default;
};

// Fixed-length normalized representation of one sample. values[0 ..
// signal_components) come from the signal pipeline and lie in [0, 1];
// anything after that is appended context (not range-restricted).
struct FeatureVector {
  std::vector<double> values;
  std::size_t signal_components = 0;
};

// Smooths a trace with a Savitzky-Golay filter: each output sample is the
// center value of the least-squares polynomial of degree `order` fitted to
// the surrounding `window` samples. Length is preserved; edges use mirror
// padding (reflection about the boundary sample, which is not repeated).
RawTrace savitzky_golay(const RawTrace& trace, int window, int order);

// Convolution weights producing the window-center value of the fit. Exposed
// so callers can amortize the solve; savitzky_golay uses it internally.
std::vector<double> savgol_center_weights(int window, int order);

struct NormalizedTrace {
  RawTrace trace;
  // True when the input was constant (max == min); the output is then all
  // zeros rather than an error.
  bool degenerate = false;
};

// Affine rescale to [0, 1]: min maps to 0, max to 1.
NormalizedTrace minmax_normalize(const RawTrace& trace);

// Output length of downsample_moving_average for a trace of length `len`.
std::size_t downsample_output_length(std::size_t len, int ds_window,
                                     double overlap);

// Moving-average downsample with a sliding window of `ds_window` samples and
// the given overlap fraction: output[i] = mean(samples[i*s, i*s + w)) with
// s = max(1, round(w * (1 - overlap))).
std::vector<double> downsample_moving_average(const RawTrace& trace,
                                              int ds_window, double overlap);

struct SignalWindow;    // dataset.hpp
struct ContextFeatures;  // dataset.hpp

// Runs filter -> normalize -> downsample on every requested channel of the
// window and concatenates the per-channel blocks in fixed EDA, ECG, EMG
// order; context features, when given, are appended last. Throws DataError
// if the window is missing a requested channel.
FeatureVector build_feature_vector(const SignalWindow& window,
                                   const ModalitySet& modalities,
                                   const PreprocessConfig& config,
                                   const ContextFeatures* context = nullptr);

}  // namespace plr
