#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace suffmdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultUtilityBound = 1e6;

/// One observed step (S^t, A^t, U^t, S^{t+1}) of one subject.
struct Transition {
  std::size_t subject = 0;  ///< position of the subject in the dataset
  std::size_t time = 0;     ///< 1-based, in [1, T]
  int action = 0;           ///< 1-based, in [1, K]
  double utility = 0.0;
  Vector state;
  Vector next_state;
};

/// n subjects, each with T+1 states in R^p, T actions in {1..K} and T
/// utilities. Immutable once constructed; the constructor validates.
class TrajectoryDataset {
 public:
  TrajectoryDataset(std::vector<std::string> subject_ids, std::vector<Matrix> states,
                    std::vector<std::vector<int>> actions,
                    std::vector<std::vector<double>> utilities, std::size_t n_actions,
                    double utility_bound = kDefaultUtilityBound);

  std::size_t n_subjects() const noexcept { return states_.size(); }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double utility_bound() const noexcept { return utility_bound_; }

  const std::string& subject_id(std::size_t i) const { return ids_.at(i); }
  const std::vector<std::string>& subject_ids() const noexcept { return ids_; }

  /// (T+1) x p; row t-1 holds S^t.
  const Matrix& states(std::size_t i) const { return states_.at(i); }
  const std::vector<int>& actions(std::size_t i) const { return actions_.at(i); }
  const std::vector<double>& utilities(std::size_t i) const { return utilities_.at(i); }

  // Times are 1-based to match the trajectory notation.
  Vector state(std::size_t i, std::size_t t) const { return states_.at(i).row(t - 1).transpose(); }
  int action(std::size_t i, std::size_t t) const { return actions_.at(i).at(t - 1); }
  double utility(std::size_t i, std::size_t t) const { return utilities_.at(i).at(t - 1); }

  /// Same trajectories restricted to the given state columns (0-based).
  TrajectoryDataset select_columns(std::span<const std::size_t> columns) const;

  friend bool operator==(const TrajectoryDataset&, const TrajectoryDataset&);

 private:
  std::vector<std::string> ids_;
  std::vector<Matrix> states_;
  std::vector<std::vector<int>> actions_;
  std::vector<std::vector<double>> utilities_;
  std::size_t horizon_ = 0;
  std::size_t state_dim_ = 0;
  std::size_t n_actions_ = 0;
  double utility_bound_ = kDefaultUtilityBound;
};

/// All (i, t) transitions in subject-major order, optionally only those
/// with A_i^t == action.
std::vector<Transition> flatten_transitions(const TrajectoryDataset& ds,
                                            std::optional<int> action = std::nullopt);

/// Inverse of flatten_transitions on an unfiltered list.
TrajectoryDataset regroup_transitions(std::span<const Transition> transitions,
                                      std::vector<std::string> subject_ids, std::size_t n_actions,
                                      double utility_bound = kDefaultUtilityBound);

/// Column-oriented view of the transitions used by regression and testing.
/// Row r of `responses` is Y^{t+1} = (U^t, S^{t+1}) for the transition in row r.
struct TransitionTable {
  Matrix states;     ///< N x p
  Matrix responses;  ///< N x (p + 1)
  std::vector<int> actions;
  std::vector<std::size_t> subjects;
  std::vector<std::size_t> times;  ///< 1-based
  std::size_t n_subjects = 0;
  std::size_t horizon = 0;
  std::size_t n_actions = 0;

  std::size_t size() const noexcept { return actions.size(); }
  std::size_t state_dim() const noexcept { return static_cast<std::size_t>(states.cols()); }
  std::size_t response_dim() const noexcept { return static_cast<std::size_t>(responses.cols()); }
};

TransitionTable make_transition_table(const TrajectoryDataset& ds);

/// Rows with the given action, relabelled as a one-action table.
TransitionTable filter_action(const TransitionTable& table, int action);

/// Rows whose subject is flagged in `keep` (indexed by subject).
TransitionTable select_subjects(const TransitionTable& table, const std::vector<bool>& keep);

// ---------------------------------------------------------------------------
// CSV: columns id, t, a, u, s_1..s_p; one row per (subject, t), t = 1..T+1;
// a and u are empty on the terminal row.

struct CsvSchema {
  std::optional<std::size_t> n_actions;  ///< inferred as the largest action when absent
  double utility_bound = kDefaultUtilityBound;
};

TrajectoryDataset read_dataset_csv(std::istream& in, const CsvSchema& schema = {});
TrajectoryDataset load_dataset_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

void write_dataset_csv(const TrajectoryDataset& ds, std::ostream& out);
void save_dataset_csv(const TrajectoryDataset& ds, const std::filesystem::path& path);

/// Round-trip decimal text (17 significant digits).
std::string format_double(double value);

}  // namespace suffmdp
