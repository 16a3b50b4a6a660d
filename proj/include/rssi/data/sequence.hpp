#pragma once

#include <Eigen/Dense>

#include "rssi/data/dataset.hpp"

namespace rssi {

// RSSI values of every record whose [s, c, g] equals the key, in dataset
// order.
struct SelectedSequence {
  FeatureTriple key;
  Eigen::VectorXd rssi;
};

// Throws DataError naming the key when nothing matches.
SelectedSequence select_sequence(const Dataset& ds, const FeatureTriple& key);

struct ChronologicalSplit {
  Eigen::VectorXd train;
  Eigen::VectorXd test;
};

// Number of leading values assigned to training: ceil(fraction * len),
// clamped so that training holds at least one window and test is nonempty.
Eigen::Index chronological_train_size(Eigen::Index length, double train_fraction,
                                      Eigen::Index window);

// First part trains, remainder tests; order preserved. Throws ValueError when
// length < window + 2.
ChronologicalSplit split_chronological(const Eigen::VectorXd& seq,
                                       double train_fraction,
                                       Eigen::Index window = 1);

// Sliding windows with stride 1: inputs.col(i) = seq[i .. i+W), target
// seq[i+W]. inputs is W x (len - W).
struct Windows {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;

  Eigen::Index count() const { return targets.size(); }
};

Windows make_windows(const Eigen::VectorXd& seq, Eigen::Index window);

// Windows over the whole sequence, partitioned by target position. Test
// targets are exactly split_chronological(...).test; the first test windows
// draw their inputs from the tail of the training segment.
struct WindowSplit {
  Windows train;
  Windows test;
};

WindowSplit make_split_windows(const Eigen::VectorXd& seq, double train_fraction,
                               Eigen::Index window);

}  // namespace rssi
