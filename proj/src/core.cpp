#include "suffmdp/core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "suffmdp/error.hpp"

namespace suffmdp {

TrajectoryDataset::TrajectoryDataset(std::vector<std::string> subject_ids,
                                     std::vector<Matrix> states,
                                     std::vector<std::vector<int>> actions,
                                     std::vector<std::vector<double>> utilities,
                                     std::size_t n_actions, double utility_bound)
    : ids_(std::move(subject_ids)),
      states_(std::move(states)),
      actions_(std::move(actions)),
      utilities_(std::move(utilities)),
      n_actions_(n_actions),
      utility_bound_(utility_bound) {
  const std::size_t n = states_.size();
  if (n == 0) throw ValidationError("dataset has no subjects");
  if (ids_.size() != n || actions_.size() != n || utilities_.size() != n)
    throw ValidationError("dataset: per-subject arrays disagree in length");
  if (n_actions_ == 0) throw ValidationError("dataset: number of actions must be positive");
  if (!(utility_bound_ > 0)) throw ValidationError("dataset: utility bound must be positive");

  if (states_[0].rows() < 2) throw ValidationError("dataset: horizon must be at least 1");
  horizon_ = static_cast<std::size_t>(states_[0].rows()) - 1;
  state_dim_ = static_cast<std::size_t>(states_[0].cols());
  if (state_dim_ == 0) throw ValidationError("dataset: state dimension must be positive");

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = states_[i];
    if (static_cast<std::size_t>(s.rows()) != horizon_ + 1)
      throw ValidationError("ragged horizons: subject '" + ids_[i] + "' has " +
                            std::to_string(s.rows() - 1) + " transitions, expected " +
                            std::to_string(horizon_));
    if (static_cast<std::size_t>(s.cols()) != state_dim_)
      throw ValidationError("subject '" + ids_[i] + "' has state dimension " +
                            std::to_string(s.cols()) + ", expected " + std::to_string(state_dim_));
    if (!s.allFinite()) throw ValidationError("subject '" + ids_[i] + "' has non-finite states");
    if (actions_[i].size() != horizon_ || utilities_[i].size() != horizon_)
      throw ValidationError("subject '" + ids_[i] + "' must have exactly T actions and utilities");
    for (std::size_t t = 0; t < horizon_; ++t) {
      const int a = actions_[i][t];
      if (a < 1 || static_cast<std::size_t>(a) > n_actions_)
        throw ValidationError("action out of range: subject '" + ids_[i] + "', t=" +
                              std::to_string(t + 1) + ", a=" + std::to_string(a) +
                              " not in {1.." + std::to_string(n_actions_) + "}");
      const double u = utilities_[i][t];
      if (!std::isfinite(u) || std::abs(u) > utility_bound_)
        throw ValidationError("utility out of bounds: subject '" + ids_[i] + "', t=" +
                              std::to_string(t + 1));
    }
  }
}

TrajectoryDataset TrajectoryDataset::select_columns(std::span<const std::size_t> columns) const {
  if (columns.empty()) throw ValidationError("select_columns: no columns requested");
  for (std::size_t c : columns)
    if (c >= state_dim_) throw ValidationError("select_columns: column index out of range");
  std::vector<Matrix> states;
  states.reserve(states_.size());
  for (const auto& s : states_) {
    Matrix r(s.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j)
      r.col(static_cast<Eigen::Index>(j)) = s.col(static_cast<Eigen::Index>(columns[j]));
    states.push_back(std::move(r));
  }
  return TrajectoryDataset(ids_, std::move(states), actions_, utilities_, n_actions_,
                           utility_bound_);
}

bool operator==(const TrajectoryDataset& a, const TrajectoryDataset& b) {
  if (a.ids_ != b.ids_ || a.actions_ != b.actions_ || a.utilities_ != b.utilities_ ||
      a.n_actions_ != b.n_actions_)
    return false;
  for (std::size_t i = 0; i < a.states_.size(); ++i)
    if (a.states_[i].rows() != b.states_[i].rows() ||
        a.states_[i].cols() != b.states_[i].cols() || a.states_[i] != b.states_[i])
      return false;
  return true;
}

std::vector<Transition> flatten_transitions(const TrajectoryDataset& ds,
                                            std::optional<int> action) {
  std::vector<Transition> out;
  out.reserve(ds.n_subjects() * ds.horizon());
  for (std::size_t i = 0; i < ds.n_subjects(); ++i) {
    const Matrix& s = ds.states(i);
    for (std::size_t t = 1; t <= ds.horizon(); ++t) {
      const int a = ds.action(i, t);
      if (action && a != *action) continue;
      out.push_back(Transition{i, t, a, ds.utility(i, t),
                               s.row(static_cast<Eigen::Index>(t - 1)).transpose(),
                               s.row(static_cast<Eigen::Index>(t)).transpose()});
    }
  }
  return out;
}

TrajectoryDataset regroup_transitions(std::span<const Transition> transitions,
                                      std::vector<std::string> subject_ids, std::size_t n_actions,
                                      double utility_bound) {
  const std::size_t n = subject_ids.size();
  if (n == 0 || transitions.empty()) throw ValidationError("regroup: nothing to regroup");
  std::vector<std::map<std::size_t, const Transition*>> by_subject(n);
  for (const auto& tr : transitions) {
    if (tr.subject >= n) throw ValidationError("regroup: subject index out of range");
    if (!by_subject[tr.subject].emplace(tr.time, &tr).second)
      throw ValidationError("regroup: duplicate (subject, time)");
  }
  std::vector<Matrix> states(n);
  std::vector<std::vector<int>> actions(n);
  std::vector<std::vector<double>> utilities(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& steps = by_subject[i];
    if (steps.empty()) throw ValidationError("regroup: subject without transitions");
    const std::size_t T = steps.size();
    const auto p = steps.begin()->second->state.size();
    states[i].resize(static_cast<Eigen::Index>(T + 1), p);
    std::size_t expected = 1;
    for (const auto& [t, tr] : steps) {
      if (t != expected++) throw ValidationError("regroup: gap in transition times");
      states[i].row(static_cast<Eigen::Index>(t - 1)) = tr->state.transpose();
      actions[i].push_back(tr->action);
      utilities[i].push_back(tr->utility);
    }
    states[i].row(static_cast<Eigen::Index>(T)) = steps.rbegin()->second->next_state.transpose();
  }
  return TrajectoryDataset(std::move(subject_ids), std::move(states), std::move(actions),
                           std::move(utilities), n_actions, utility_bound);
}

TransitionTable make_transition_table(const TrajectoryDataset& ds) {
  const std::size_t n = ds.n_subjects(), T = ds.horizon();
  const auto p = static_cast<Eigen::Index>(ds.state_dim());
  const auto N = static_cast<Eigen::Index>(n * T);
  TransitionTable table;
  table.states.resize(N, p);
  table.responses.resize(N, p + 1);
  table.actions.reserve(n * T);
  table.subjects.reserve(n * T);
  table.times.reserve(n * T);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& s = ds.states(i);
    for (std::size_t t = 1; t <= T; ++t, ++r) {
      table.states.row(r) = s.row(static_cast<Eigen::Index>(t - 1));
      table.responses(r, 0) = ds.utility(i, t);
      table.responses.row(r).tail(p) = s.row(static_cast<Eigen::Index>(t));
      table.actions.push_back(ds.action(i, t));
      table.subjects.push_back(i);
      table.times.push_back(t);
    }
  }
  table.n_subjects = n;
  table.horizon = T;
  table.n_actions = ds.n_actions();
  return table;
}

namespace {

TransitionTable select_rows(const TransitionTable& table, const std::vector<Eigen::Index>& rows) {
  TransitionTable out;
  const auto N = static_cast<Eigen::Index>(rows.size());
  out.states.resize(N, table.states.cols());
  out.responses.resize(N, table.responses.cols());
  for (Eigen::Index k = 0; k < N; ++k) {
    const Eigen::Index r = rows[static_cast<std::size_t>(k)];
    out.states.row(k) = table.states.row(r);
    out.responses.row(k) = table.responses.row(r);
    out.actions.push_back(table.actions[static_cast<std::size_t>(r)]);
    out.subjects.push_back(table.subjects[static_cast<std::size_t>(r)]);
    out.times.push_back(table.times[static_cast<std::size_t>(r)]);
  }
  out.n_subjects = table.n_subjects;
  out.horizon = table.horizon;
  out.n_actions = table.n_actions;
  return out;
}

}  // namespace

TransitionTable filter_action(const TransitionTable& table, int action) {
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < table.size(); ++r)
    if (table.actions[r] == action) rows.push_back(static_cast<Eigen::Index>(r));
  if (rows.empty()) throw ValidationError("action " + std::to_string(action) + " absent from data");
  TransitionTable out = select_rows(table, rows);
  std::fill(out.actions.begin(), out.actions.end(), 1);
  out.n_actions = 1;
  return out;
}

TransitionTable select_subjects(const TransitionTable& table, const std::vector<bool>& keep) {
  if (keep.size() != table.n_subjects) throw ValidationError("select_subjects: mask size mismatch");
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < table.size(); ++r)
    if (keep[table.subjects[r]]) rows.push_back(static_cast<Eigen::Index>(r));
  return select_rows(table, rows);
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

template <class T>
bool parse_number(const std::string& text, T& value) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

struct Row {
  std::size_t t = 0;
  std::optional<int> action;
  std::optional<double> utility;
  std::vector<double> state;
  std::size_t line = 0;
};

}  // namespace

TrajectoryDataset read_dataset_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty input");
  const auto header = split_csv_line(line);

  std::optional<std::size_t> col_id, col_t, col_a, col_u;
  std::map<std::size_t, std::size_t> state_cols;  // state index (1-based) -> column
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "id") col_id = c;
    else if (h == "t") col_t = c;
    else if (h == "a") col_a = c;
    else if (h == "u") col_u = c;
    else if (h.rfind("s_", 0) == 0) {
      std::size_t k = 0;
      if (!parse_number(h.substr(2), k) || k == 0)
        throw ValidationError("csv: bad state column name '" + h + "'");
      if (!state_cols.emplace(k, c).second)
        throw ValidationError("csv: duplicate state column '" + h + "'");
    } else {
      throw ValidationError("csv: unexpected column '" + h + "'");
    }
  }
  if (!col_id || !col_t || !col_a || !col_u)
    throw ValidationError("csv: header must contain id, t, a, u");
  if (state_cols.empty()) throw ValidationError("csv: no state columns s_1..s_p");
  const std::size_t p = state_cols.size();
  if (state_cols.rbegin()->first != p)
    throw ValidationError("csv: state columns must be s_1..s_p without gaps");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    const std::string& id = cells[*col_id];
    if (id.empty()) throw ValidationError("csv line " + std::to_string(line_no) + ": missing id");
    Row row;
    row.line = line_no;
    if (!parse_number(cells[*col_t], row.t) || row.t == 0)
      throw ValidationError("missing or invalid value at (id=" + id + ", column=t) on line " +
                            std::to_string(line_no));
    auto where = [&](const std::string& column) {
      return "(id=" + id + ", t=" + std::to_string(row.t) + ", column=" + column + ")";
    };
    if (!cells[*col_a].empty()) {
      int a = 0;
      if (!parse_number(cells[*col_a], a)) throw ValidationError("invalid action at " + where("a"));
      row.action = a;
    }
    if (!cells[*col_u].empty()) {
      double u = 0;
      if (!parse_number(cells[*col_u], u)) throw ValidationError("invalid utility at " + where("u"));
      row.utility = u;
    }
    row.state.resize(p);
    for (const auto& [k, c] : state_cols) {
      const std::string column = "s_" + std::to_string(k);
      if (cells[c].empty()) throw ValidationError("missing value at " + where(column));
      if (!parse_number(cells[c], row.state[k - 1]))
        throw ValidationError("invalid value at " + where(column));
    }
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(std::move(row));
  }
  if (order.empty()) throw ValidationError("csv: no data rows");

  std::optional<std::size_t> horizon;
  int max_action = 0;
  std::vector<Matrix> states;
  std::vector<std::vector<int>> actions;
  std::vector<std::vector<double>> utilities;
  for (const auto& id : order) {
    auto& subject = rows.at(id);
    std::stable_sort(subject.begin(), subject.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });
    for (std::size_t k = 0; k < subject.size(); ++k)
      if (subject[k].t != k + 1)
        throw ValidationError("csv: subject '" + id + "' has missing or duplicate t=" +
                              std::to_string(k + 1));
    const std::size_t T = subject.size() - 1;
    if (T == 0) throw ValidationError("csv: subject '" + id + "' has a single row");
    if (!horizon) horizon = T;
    if (*horizon != T)
      throw ValidationError("ragged horizons: subject '" + id + "' has T=" + std::to_string(T) +
                            ", expected T=" + std::to_string(*horizon));
    Matrix s(static_cast<Eigen::Index>(T + 1), static_cast<Eigen::Index>(p));
    std::vector<int> a(T);
    std::vector<double> u(T);
    for (std::size_t k = 0; k <= T; ++k) {
      const Row& row = subject[k];
      for (std::size_t j = 0; j < p; ++j)
        s(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = row.state[j];
      if (k == T) continue;
      const std::string at = "(id=" + id + ", t=" + std::to_string(row.t) + ", column=";
      if (!row.action) throw ValidationError("missing value at " + at + "a)");
      if (!row.utility) throw ValidationError("missing value at " + at + "u)");
      if (*row.action < 1) throw ValidationError("action out of range at " + at + "a)");
      if (schema.n_actions && static_cast<std::size_t>(*row.action) > *schema.n_actions)
        throw ValidationError("action out of range at " + at + "a): " +
                              std::to_string(*row.action) + " not in {1.." +
                              std::to_string(*schema.n_actions) + "}");
      a[k] = *row.action;
      u[k] = *row.utility;
      max_action = std::max(max_action, a[k]);
    }
    states.push_back(std::move(s));
    actions.push_back(std::move(a));
    utilities.push_back(std::move(u));
  }
  const std::size_t K = schema.n_actions.value_or(static_cast<std::size_t>(max_action));
  return TrajectoryDataset(std::move(order), std::move(states), std::move(actions),
                           std::move(utilities), K, schema.utility_bound);
}

TrajectoryDataset load_dataset_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_dataset_csv(in, schema);
}

void write_dataset_csv(const TrajectoryDataset& ds, std::ostream& out) {
  out << "id,t,a,u";
  for (std::size_t j = 1; j <= ds.state_dim(); ++j) out << ",s_" << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.n_subjects(); ++i) {
    const Matrix& s = ds.states(i);
    for (std::size_t t = 1; t <= ds.horizon() + 1; ++t) {
      out << ds.subject_id(i) << ',' << t << ',';
      if (t <= ds.horizon()) out << ds.action(i, t) << ',' << format_double(ds.utility(i, t));
      else out << ',';
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        out << ',' << format_double(s(static_cast<Eigen::Index>(t - 1), j));
      out << '\n';
    }
  }
}

void save_dataset_csv(const TrajectoryDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_dataset_csv(ds, out);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace suffmdp
