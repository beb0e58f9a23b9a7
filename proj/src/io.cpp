#include "ddfc/io.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace ddfc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::ConfigError, "cannot write file: " + tmp);
    f << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

Eigen::Index CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < headers.size(); ++i)
    if (headers[i] == name) return static_cast<Eigen::Index>(i);
  throw Error(ErrorCode::ConfigError, "csv: missing column " + name);
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto idx = column_index(name);
  std::vector<double> out(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    out[static_cast<std::size_t>(r)] = data(r, idx);
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::DatasetRequired, "cannot open file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(f, line))
    throw Error(ErrorCode::ConfigError, "csv: empty file " + path);
  for (auto& h : split_csv_line(line)) table.headers.push_back(h);

  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.headers.size())
      throw Error(ErrorCode::ConfigError, "csv: ragged row in " + path);
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) row[i] = std::stod(fields[i]);
    rows.push_back(std::move(row));
  }
  table.data.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(table.headers.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      table.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& headers,
               const Matrix& data) {
  if (static_cast<Eigen::Index>(headers.size()) != data.cols())
    throw Error(ErrorCode::InvalidArgument, "write_csv: header/column mismatch");
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < headers.size(); ++i)
    os << headers[i] << (i + 1 < headers.size() ? "," : "\n");
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (Eigen::Index c = 0; c < data.cols(); ++c)
      os << data(r, c) << (c + 1 < data.cols() ? "," : "\n");
  atomic_write(path, os.str());
}

void write_dataset(const std::string& path, const CollectedDataset& dataset,
                   double dt_sample) {
  const auto T = dataset.data.length();
  Matrix data(T, 3);
  for (Eigen::Index k = 0; k < T; ++k) {
    data(k, 0) = static_cast<double>(k) * dt_sample;
    data(k, 1) = dataset.data.d.samples()(k, 0);
    data(k, 2) = dataset.data.y.samples()(k, 0);
  }
  write_csv(path, {"t", "delta_v", "delta_f"}, data);

  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["seed"] = dataset.seed;
  meta["base_mva"] = dataset.base_mva;
  meta["probe_amplitude_mw"] = dataset.probe_amplitude_mw;
  meta["pe_commanded"] = dataset.pe_commanded;
  meta["pe_recorded"] = dataset.pe_recorded;
  meta["pe_sigma_min"] = dataset.pe_sigma_min;
  meta["noisy"] = dataset.data.noisy;
  meta["dt_sample"] = dt_sample;
  if (!dataset.warning.empty()) meta["warning"] = dataset.warning;
  atomic_write(path + ".meta.json", meta.dump(2) + "\n");
}

DatasetFile read_dataset(const std::string& path) {
  const auto table = read_csv(path);
  const auto t = table.column("t");
  if (t.size() < 2)
    throw Error(ErrorCode::InconsistentDataset, "dataset: need at least 2 samples");
  const double dt = t[1] - t[0];
  const auto T = table.data.rows();

  DatasetFile out;
  Matrix dv(T, 1), df(T, 1);
  dv.col(0) = table.data.col(table.column_index("delta_v"));
  df.col(0) = table.data.col(table.column_index("delta_f"));
  out.data.u = Signal(Matrix::Zero(T, 0), dt);
  out.data.d = Signal(std::move(dv), dt);
  out.data.y = Signal(std::move(df), dt);
  out.data.noisy = true;

  const std::string meta_path = path + ".meta.json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream f(meta_path);
    nlohmann::json meta = nlohmann::json::parse(f);
    out.base_mva = meta.value("base_mva", 100.0);
    out.seed = meta.value("seed", std::uint64_t{0});
    out.pe_recorded = meta.value("pe_recorded", false);
    out.pe_commanded = meta.value("pe_commanded", false);
    out.probe_amplitude_mw = meta.value("probe_amplitude_mw", 1.0);
    out.warning = meta.value("warning", std::string{});
    out.data.noisy = meta.value("noisy", true);
  }
  return out;
}

void write_result(const std::string& path, const SimResult& result) {
  const auto n = result.areas.size();
  const auto T = result.samples();
  std::vector<std::string> headers{"t"};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string prefix = "area" + std::to_string(i + 1) + "_";
    headers.push_back(prefix + "delta_f");
    headers.push_back(prefix + "delta_p_tie");
    headers.push_back(prefix + "delta_p_ibr");
    headers.push_back(prefix + "delta_p_u_hat");
    headers.push_back(prefix + "gen_speed");
  }
  Matrix data(T, 1 + 5 * static_cast<Eigen::Index>(n));
  data.col(0) = result.time;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = 1 + 5 * static_cast<Eigen::Index>(i);
    data.col(c + 0) = result.areas[i].delta_f_hz;
    data.col(c + 1) = result.areas[i].delta_p_tie;
    data.col(c + 2) = result.areas[i].delta_p_ibr;
    data.col(c + 3) = result.areas[i].d_hat_u;
    data.col(c + 4) = result.areas[i].gen_speed_pu;
  }
  write_csv(path, headers, data);
}

}  // namespace ddfc
