#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ncrs/archive.hpp"
#include "ncrs/cmaes.hpp"
#include "ncrs/environment.hpp"
#include "ncrs/errors.hpp"
#include "ncrs/nca.hpp"
#include "ncrs/training.hpp"

namespace py = pybind11;
using namespace ncrs;

namespace {

Task task_arg(const std::string& name) { return parse_task(name); }

EvalSettings settings_for(const std::string& task, const std::string& activation, int episodes) {
    EvalSettings s;
    s.task = task_arg(task);
    s.activation = parse_activation(activation);
    s.episodes = episodes;
    return s;
}

Genome genome_arg(const Eigen::VectorXd& params, const ChannelLayout& layout) {
    if (params.size() != static_cast<Eigen::Index>(genome_length(layout)))
        throw std::invalid_argument("expected " + std::to_string(genome_length(layout)) + " parameters, got " +
                                    std::to_string(params.size()));
    return Genome(params);
}

py::array_t<double> grid_array(const CellGrid& g) {
    py::array_t<double> out({g.height(), g.width(), g.channels()});
    std::copy(g.values().begin(), g.values().end(), out.mutable_data());
    return out;
}

py::dict report_dict(const FitnessReport& r) {
    py::dict d;
    d["fitness"] = r.fitness;
    d["valid"] = r.valid;
    d["success_count"] = r.success_count;
    d["episodes"] = r.episodes;
    d["morphology"] = r.morphology.to_text();
    if (r.features)
        d["features"] = py::make_tuple(r.features->sensors, r.features->actuators, r.features->body_parts);
    else
        d["features"] = py::none();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Neural cellular robot substrate: NCA development, simulation and evolution";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    m.def("genome_length", [](const std::string& task) {
        return genome_length(ChannelLayout::for_task(task_arg(task)));
    }, py::arg("task") = "lc");
    m.def("feature_configurations", &feature_configurations, py::arg("grid_area") = 25);
    m.def("sensor_activity", [](double d, double playfield) { return sensor_activity(d, playfield); },
          py::arg("distance"), py::arg("playfield") = 60.0);

    m.def("develop", [](const Eigen::VectorXd& params, const std::string& task, const std::string& activation) {
        const auto layout = ChannelLayout::for_task(task_arg(task));
        return grid_array(develop(genome_arg(params, layout), layout, GridDims{}, parse_activation(activation)));
    }, py::arg("params"), py::arg("task") = "lc", py::arg("activation") = "relu",
       "Grid after the ten development steps, shaped (height, width, channels).");

    m.def("morphology", [](const Eigen::VectorXd& params, const std::string& task, const std::string& activation) {
        const auto layout = ChannelLayout::for_task(task_arg(task));
        return extract_body(develop(genome_arg(params, layout), layout, GridDims{}, parse_activation(activation)))
            .to_text();
    }, py::arg("params"), py::arg("task") = "lc", py::arg("activation") = "relu");

    m.def("evaluate", [](const Eigen::VectorXd& params, const std::string& task, std::uint64_t seed, int episodes,
                         const std::string& activation) {
        const auto s = settings_for(task, activation, episodes);
        FitnessReport r;
        {
            py::gil_scoped_release release;
            r = evaluate_genome(genome_arg(params, s.layout()), s, seed);
        }
        return report_dict(r);
    }, py::arg("params"), py::arg("task") = "lc", py::arg("seed") = 0, py::arg("episodes") = 12,
       py::arg("activation") = "relu", "Training-style evaluation: mean fitness over the episode set.");

    m.def("campaign", [](const Eigen::VectorXd& params, const std::string& task, std::uint64_t seed, int episodes,
                         int jobs) {
        const auto s = settings_for(task, "relu", 12);
        CampaignReport r;
        {
            py::gil_scoped_release release;
            r = run_campaign(genome_arg(params, s.layout()), s, seed, episodes, jobs);
        }
        py::dict d;
        d["mean_fitness"] = r.mean_fitness;
        d["success_pct"] = r.success_pct;
        d["valid"] = r.valid;
        d["episode_fitness"] = r.episode_fitness;
        return d;
    }, py::arg("params"), py::arg("task") = "lc", py::arg("seed") = 0, py::arg("episodes") = 100,
       py::arg("jobs") = 1);

    m.def("read_genome", [](const std::filesystem::path& path) {
        const auto f = read_genome_file(path);
        py::dict h;
        h["task"] = std::string(task_name(f.header.task));
        h["activation"] = std::string(activation_name(f.header.activation));
        h["height"] = f.header.dims.height;
        h["width"] = f.header.dims.width;
        h["channels"] = f.header.layout.n_total();
        return py::make_tuple(f.genome.params, h);
    }, py::arg("path"), "Returns (params, header dict).");

    m.def("write_genome", [](const std::filesystem::path& path, const Eigen::VectorXd& params,
                             const std::string& task, const std::string& activation) {
        GenomeFile f;
        f.header.task = task_arg(task);
        f.header.layout = ChannelLayout::for_task(f.header.task);
        f.header.activation = parse_activation(activation);
        f.genome = genome_arg(params, f.header.layout);
        write_genome_file(path, f);
    }, py::arg("path"), py::arg("params"), py::arg("task") = "lc", py::arg("activation") = "relu");

    py::class_<CmaState>(m, "CmaEs", "CMA-ES (maximisation) with an ask/tell interface.")
        .def(py::init([](int dimension, double sigma0, int lambda, std::uint64_t seed,
                         std::optional<Eigen::VectorXd> mean) {
                 CmaConfig c;
                 c.dimension = dimension;
                 c.sigma0 = sigma0;
                 c.lambda = lambda;
                 c.seed = seed;
                 if (mean)
                     c.mean = *mean;
                 return cma_init(c);
             }),
             py::arg("dimension"), py::arg("sigma0") = 0.01, py::arg("lambda_") = 0, py::arg("seed") = 0,
             py::arg("mean") = py::none())
        .def("ask", [](CmaState& s) { return ask(s); })
        .def("tell", [](CmaState& s, const std::vector<Eigen::VectorXd>& xs, const std::vector<double>& f) {
            tell(s, xs, f);
        })
        .def_property_readonly("mean", [](const CmaState& s) { return s.mean; })
        .def_property_readonly("sigma", [](const CmaState& s) { return s.sigma; })
        .def_property_readonly("generation", [](const CmaState& s) { return s.generation; })
        .def_property_readonly("covariance", [](const CmaState& s) { return covariance(s); });
}
