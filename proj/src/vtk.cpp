#include "epd/io.hpp"

#include "epd/plasticity.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace epd {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write VTK file " + path.string());
  return out;
}

void write_geometry(std::ostream& out, const std::string& title, const Mesh& mesh) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    out << format_double(mesh.nodes()(0, i)) << ' ' << format_double(mesh.nodes()(1, i))
        << " 0\n";
  }
  out << "CELLS " << mesh.num_elements() << ' ' << 4 * mesh.num_elements() << '\n';
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto v = mesh.element(e);
    out << "3 " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.num_elements() << '\n';
  for (Index e = 0; e < mesh.num_elements(); ++e) out << "5\n";
}

void write_scalars(std::ostream& out, const std::string& name, const Eigen::VectorXd& v) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

}  // namespace

void write_vtk_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  auto out = open_for_write(path);
  write_geometry(out, "epd mesh level " + std::to_string(mesh.level()), mesh);
}

void write_vtk_snapshot(const std::filesystem::path& path, const Mesh& mesh, const State& state,
                        const StressField& sigma, double magnification) {
  if (state.u.size() != mesh.num_dofs() || state.zeta.size() != mesh.num_nodes() ||
      state.pi.cols() != mesh.num_elements() || sigma.cols() != mesh.num_elements()) {
    throw std::invalid_argument("vtk: field sizes do not match the mesh");
  }
  auto out = open_for_write(path);
  write_geometry(out, "epd snapshot displacement_magnification=" + format_double(magnification),
                 mesh);

  out << "POINT_DATA " << mesh.num_nodes() << '\n';
  write_scalars(out, "one_minus_zeta", (1.0 - state.zeta.array()).matrix());
  out << "VECTORS displacement double\n";
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    out << format_double(state.u(2 * i)) << ' ' << format_double(state.u(2 * i + 1)) << " 0\n";
  }

  Eigen::VectorXd pnorm(mesh.num_elements()), vm(mesh.num_elements());
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    pnorm(e) = plastic_norm(state.pi(0, e), state.pi(1, e));
    vm(e) = von_mises(sigma, e);
  }
  out << "CELL_DATA " << mesh.num_elements() << '\n';
  write_scalars(out, "plastic_norm", pnorm);
  write_scalars(out, "von_mises", vm);
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

VtkData read_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read VTK file " + path.string());
  VtkData data;
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw std::runtime_error("not a legacy VTK file");
  std::getline(in, data.title);
  std::string word;
  in >> word;
  if (word != "ASCII") throw std::runtime_error("only ASCII VTK is supported");

  auto read_real = [&] {
    std::string token;
    in >> token;
    return parse_double(token);
  };

  Index npoints = 0, ncells = 0;
  enum class Section { none, point, cell } section = Section::none;
  while (in >> word) {
    if (word == "DATASET") {
      in >> word;
      if (word != "UNSTRUCTURED_GRID") throw std::runtime_error("unsupported dataset " + word);
    } else if (word == "POINTS") {
      in >> npoints >> word;
      data.points.resize(2, npoints);
      for (Index i = 0; i < npoints; ++i) {
        data.points(0, i) = read_real();
        data.points(1, i) = read_real();
        read_real();
      }
    } else if (word == "CELLS") {
      Index size = 0;
      in >> ncells >> size;
      data.cells.resize(3, ncells);
      for (Index e = 0; e < ncells; ++e) {
        int count = 0;
        in >> count;
        if (count != 3) throw std::runtime_error("only triangle cells are supported");
        in >> data.cells(0, e) >> data.cells(1, e) >> data.cells(2, e);
      }
    } else if (word == "CELL_TYPES") {
      Index n = 0;
      in >> n;
      for (Index e = 0; e < n; ++e) {
        int type = 0;
        in >> type;
        if (type != 5) throw std::runtime_error("unexpected cell type");
      }
    } else if (word == "POINT_DATA") {
      in >> npoints;
      section = Section::point;
    } else if (word == "CELL_DATA") {
      in >> ncells;
      section = Section::cell;
    } else if (word == "SCALARS") {
      std::string name, type;
      in >> name >> type;
      std::getline(in, line);  // optional component count
      in >> word >> word;      // LOOKUP_TABLE default
      const Index n = section == Section::point ? npoints : ncells;
      Eigen::VectorXd v(n);
      for (Index i = 0; i < n; ++i) v(i) = read_real();
      (section == Section::point ? data.point_scalars : data.cell_scalars)[name] = v;
    } else if (word == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      Eigen::Matrix2Xd v(2, npoints);
      for (Index i = 0; i < npoints; ++i) {
        v(0, i) = read_real();
        v(1, i) = read_real();
        read_real();
      }
      data.point_vectors[name] = v;
    } else {
      throw std::runtime_error("unexpected VTK token '" + word + "'");
    }
  }
  return data;
}

}  // namespace epd
