#include "rssi/data/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rssi/error.hpp"

namespace rssi {

using Eigen::Index;

SelectedSequence select_sequence(const Dataset& ds, const FeatureTriple& key) {
  if (ds.empty()) throw DataError("select_sequence: dataset is empty");
  std::vector<double> values;
  for (const auto& r : ds.records) {
    if (same_key(feature_triple(r), key)) values.push_back(r.rssi_dbm);
  }
  if (values.empty()) {
    throw DataError("select_sequence: no records match key " + to_string(key));
  }
  SelectedSequence out;
  out.key = key;
  out.rssi = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                               static_cast<Index>(values.size()));
  return out;
}

Index chronological_train_size(Index length, double train_fraction,
                               Index window) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValueError("chronological split: fraction must lie in (0, 1)");
  }
  if (window < 1) throw ValueError("chronological split: window must be >= 1");
  if (length < window + 2) {
    throw ValueError("chronological split: sequence of length " +
                     std::to_string(length) + " is shorter than window + 2 = " +
                     std::to_string(window + 2));
  }
  // The small slack keeps e.g. 0.8 * 5 from rounding up to 5.
  const auto raw = static_cast<Index>(
      std::ceil(train_fraction * static_cast<double>(length) - 1e-9));
  return std::clamp(raw, window + 1, length - 1);
}

ChronologicalSplit split_chronological(const Eigen::VectorXd& seq,
                                       double train_fraction, Index window) {
  const Index n_train =
      chronological_train_size(seq.size(), train_fraction, window);
  return {seq.head(n_train), seq.tail(seq.size() - n_train)};
}

Windows make_windows(const Eigen::VectorXd& seq, Index window) {
  if (window < 1) throw ValueError("make_windows: window must be >= 1");
  if (seq.size() <= window) {
    throw ValueError("make_windows: sequence of length " +
                     std::to_string(seq.size()) + " needs more than " +
                     std::to_string(window) + " values");
  }
  const Index count = seq.size() - window;
  Windows w;
  w.inputs.resize(window, count);
  w.targets = seq.tail(count);
  for (Index i = 0; i < count; ++i) w.inputs.col(i) = seq.segment(i, window);
  return w;
}

WindowSplit make_split_windows(const Eigen::VectorXd& seq, double train_fraction,
                               Index window) {
  const Index n_train =
      chronological_train_size(seq.size(), train_fraction, window);
  Windows all = make_windows(seq, window);
  // Window i predicts seq[i + window]; training targets end at n_train - 1.
  const Index n_train_windows = n_train - window;
  WindowSplit out;
  out.train.inputs = all.inputs.leftCols(n_train_windows);
  out.train.targets = all.targets.head(n_train_windows);
  out.test.inputs = all.inputs.rightCols(all.count() - n_train_windows);
  out.test.targets = all.targets.tail(all.count() - n_train_windows);
  return out;
}

}  // namespace rssi
