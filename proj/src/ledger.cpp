#include "epd/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace epd {
namespace {

struct Column {
  const char* name;
  double LedgerRow::*real = nullptr;
  int LedgerRow::*integer = nullptr;
};

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = {
      {"step", nullptr, &LedgerRow::step},
      {"time_s", &LedgerRow::time_s},
      {"stored_energy_J", &LedgerRow::stored_energy_J},
      {"plastic_diss_cum_J", &LedgerRow::plastic_diss_cum_J},
      {"damage_diss_cum_J", &LedgerRow::damage_diss_cum_J},
      {"external_work_cum_J", &LedgerRow::external_work_cum_J},
      {"balance_residual_J", &LedgerRow::balance_residual_J},
      {"reaction_force_Pa", &LedgerRow::reaction_force_Pa},
      {"min_zeta", &LedgerRow::min_zeta},
      {"max_plastic_norm", &LedgerRow::max_plastic_norm},
      {"newton_iters", nullptr, &LedgerRow::newton_iters},
      {"qp_iters", nullptr, &LedgerRow::qp_iters},
      {"tau_s", &LedgerRow::tau_s},
      {"plastic_diss_inc_J", &LedgerRow::plastic_diss_inc_J},
      {"damage_diss_inc_J", &LedgerRow::damage_diss_inc_J},
      {"external_work_inc_J", &LedgerRow::external_work_inc_J},
      {"plastic_estimate_slack_J", &LedgerRow::plastic_estimate_slack_J},
      {"damage_estimate_slack_J", &LedgerRow::damage_estimate_slack_J},
      {"energy_scale_J", &LedgerRow::energy_scale_J},
      {"max_von_mises_Pa", &LedgerRow::max_von_mises_Pa},
      {"yield_excess_Pa", &LedgerRow::yield_excess_Pa},
  };
  return cols;
}

}  // namespace

const std::vector<std::string>& ledger_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : columns()) n.emplace_back(c.name);
    return n;
  }();
  return names;
}

void write_ledger_header(std::ostream& out) {
  const auto& names = ledger_columns();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
}

void write_ledger_row(std::ostream& out, const LedgerRow& row) {
  bool first = true;
  for (const auto& c : columns()) {
    if (!first) out << ',';
    first = false;
    if (c.integer) {
      out << row.*c.integer;
    } else {
      out << format_double(row.*c.real);
    }
  }
  out << '\n';
}

void write_ledger(const std::filesystem::path& path, const std::vector<LedgerRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ledger " + path.string());
  write_ledger_header(out);
  for (const auto& r : rows) write_ledger_row(out, r);
}

std::vector<LedgerRow> read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read ledger " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty ledger " + path.string());

  std::vector<int> index;  // file column -> table column, -1 if unknown
  {
    std::istringstream header(line);
    std::string name;
    const auto& names = ledger_columns();
    while (std::getline(header, name, ',')) {
      int found = -1;
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) found = int(i);
      index.push_back(found);
    }
  }
  std::vector<LedgerRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LedgerRow row;
    std::istringstream fields(line);
    std::string cell;
    for (std::size_t k = 0; std::getline(fields, cell, ','); ++k) {
      if (k >= index.size() || index[k] < 0) continue;
      const auto& c = columns()[index[k]];
      if (c.integer) {
        row.*c.integer = std::stoi(cell);
      } else {
        row.*c.real = parse_double(cell);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

double initial_energy_of(const LedgerRow& row) {
  return row.stored_energy_J + row.plastic_diss_cum_J + row.damage_diss_cum_J -
         row.external_work_cum_J - row.balance_residual_J;
}

}  // namespace epd
