#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "densnet/basis.hpp"
#include "densnet/checkpoint.hpp"
#include "densnet/dataset.hpp"
#include "densnet/error.hpp"
#include "densnet/experiments.hpp"
#include "densnet/irreps.hpp"
#include "densnet/model.hpp"
#include "densnet/so3.hpp"

namespace py = pybind11;
using namespace densnet;

namespace {

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

Geometry make_geometry(const std::vector<std::string>& species, const Positions& xyz) {
  if (static_cast<Eigen::Index>(species.size()) != xyz.rows()) throw Error("species and positions differ in length");
  Geometry g;
  for (Eigen::Index i = 0; i < xyz.rows(); ++i) {
    g.species.push_back(parse_species(species[static_cast<std::size_t>(i)]));
    g.positions.emplace_back(xyz(i, 0), xyz(i, 1), xyz(i, 2));
  }
  g.validate();
  return g;
}

py::tuple split_geometry(const Geometry& g) {
  std::vector<std::string> names;
  Positions xyz(static_cast<Eigen::Index>(g.size()), 3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    names.push_back(species_name(g.species[i]));
    xyz.row(static_cast<Eigen::Index>(i)) = g.positions[i].transpose();
  }
  return py::make_tuple(names, xyz);
}

py::array_t<double> cg_array(int l1, int l2, int l3) {
  const auto& c = so3::clebsch_gordan(l1, l2, l3);
  py::array_t<double> out({c.n1(), c.n2(), c.n3()});
  std::copy(c.values.begin(), c.values.end(), out.mutable_data());
  return out;
}

net::ModelConfig model_config(const std::string& hidden, const std::string& output_h, const std::string& output_o,
                              int num_layers, std::uint64_t seed, double cutoff) {
  net::ModelConfig c;
  c.hidden_spec = IrrepsSpec::parse(hidden);
  c.output_spec = {IrrepsSpec::parse(output_h), IrrepsSpec::parse(output_o)};
  c.num_layers = num_layers;
  c.seed = seed;
  c.cutoff = cutoff;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_densnet, m) {
  m.doc() = "Equivariant density-coefficient networks";
  py::register_exception<Error>(m, "DensnetError", PyExc_ValueError);

  m.def("parse_irreps", [](const std::string& s) { return IrrepsSpec::parse(s).str(); }, "Normalized irreps string.");
  m.def("irreps_dim", [](const std::string& s) { return IrrepsSpec::parse(s).dim(); });
  m.def("hidden_config", [](int l_h, int n_s) { return hidden_config(l_h, n_s).str(); }, py::arg("l_h"),
        py::arg("n_s"));
  m.def("truncate_spec", [](const std::string& s, int lmax) { return truncate_spec(IrrepsSpec::parse(s), lmax).str(); });

  m.def("real_sph_harm", [](int lmax, const Eigen::Vector3d& n) { return so3::real_sph_harm(lmax, n); },
        py::arg("lmax"), py::arg("direction"));
  m.def("random_rotation", [](std::uint64_t seed) { return Eigen::Matrix3d(so3::random_rotation(seed).matrix()); });
  m.def("wigner_d", [](int l, const Eigen::Matrix3d& r) { return so3::wigner_d(l, so3::Rotation(r)); }, py::arg("l"),
        py::arg("rotation"));
  m.def("clebsch_gordan", &cg_array, py::arg("l1"), py::arg("l2"), py::arg("l3"));

  m.def("synthetic_basis_spec", [](const std::string& species) {
    return density::synthetic_basis().spec(parse_species(species)).str();
  });
  m.def("generate_clusters", [](int n, int molecules, std::uint64_t seed) {
    py::list out;
    for (const auto& g : data::generate_clusters(n, molecules, seed)) out.append(split_geometry(g));
    return out;
  }, py::arg("n_structures"), py::arg("n_molecules"), py::arg("seed"));

  py::class_<net::Model>(m, "Model")
      .def(py::init([](const std::string& hidden, const std::string& output_h, const std::string& output_o,
                       int num_layers, std::uint64_t seed, double cutoff) {
             return net::Model(model_config(hidden, output_h, output_o, num_layers, seed, cutoff));
           }),
           py::arg("hidden"), py::arg("output_h"), py::arg("output_o"), py::arg("num_layers") = 3,
           py::arg("seed") = 0, py::arg("cutoff") = 3.5)
      .def_static("load", &net::load_checkpoint, py::arg("path"))
      .def("save", [](const net::Model& model, const std::string& path) { net::save_checkpoint(model, path); })
      .def_property_readonly("param_count", [](const net::Model& model) { return model.param_count(); })
      .def("forward", [](const net::Model& model, const std::vector<std::string>& species, const Positions& xyz) {
             return model.forward(make_geometry(species, xyz)).atoms;
           },
           py::arg("species"), py::arg("positions"), "Per-atom coefficient vectors.");

  m.def("parse_config", [](const std::string& text) { return exp::format_config(exp::parse_config(text)); },
        "Normalized key = value config text.");
  m.def("run_experiment", [](int which, const std::string& config_text, const std::string& out_dir) {
    auto cfg = exp::parse_config(config_text);
    cfg.out_dir = out_dir;
    py::gil_scoped_release release;
    switch (which) {
      case 1: {
        auto r = exp::experiment1(cfg);
        exp::write_outputs(r, cfg);
        return exp::format_csv(r.table);
      }
      case 2: {
        auto r = exp::experiment2(cfg);
        exp::write_outputs(r, cfg);
        return exp::format_csv(r.table);
      }
      case 3: {
        auto r = exp::experiment3(cfg);
        exp::write_outputs(r, cfg);
        return exp::format_csv(r.norms);
      }
      default:
        throw Error("experiment must be 1, 2 or 3");
    }
  }, py::arg("experiment"), py::arg("config"), py::arg("out_dir"),
        "Runs an experiment, writes its artifacts and returns the main table as CSV text.");
}
