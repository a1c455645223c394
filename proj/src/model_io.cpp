#include "ksa/model_io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace ksa {

using nlohmann::json;

std::string arch_name(Arch arch) {
    switch (arch) {
        case Arch::Basic: return "basic";
        case Arch::Diag: return "diag";
        case Arch::ResBasic: return "res-basic";
        case Arch::ResDiag: return "res-diag";
        case Arch::Mlp: return "mlp";
    }
    throw std::logic_error("arch_name: unknown architecture");
}

Arch arch_from_name(const std::string& name) {
    if (name == "basic") return Arch::Basic;
    if (name == "diag") return Arch::Diag;
    if (name == "res-basic") return Arch::ResBasic;
    if (name == "res-diag") return Arch::ResDiag;
    if (name == "mlp") return Arch::Mlp;
    throw std::invalid_argument("unknown architecture '" + name + "'");
}

void save_model(const std::string& path, const ModelFile& model) {
    json j;
    j["format"] = "ksurv-model-v1";
    j["arch"] = arch_name(model.net.arch());
    j["input_dim"] = model.net.input_dim();
    j["lambda"] = model.net.lambda();
    j["mlp"] = {{"hidden_layers", model.net.mlp_spec().hidden_layers},
                {"hidden_width", model.net.mlp_spec().hidden_width}};
    j["parameters"] = std::vector<double>(
        model.net.parameters().data(),
        model.net.parameters().data() + model.net.parameters().size());
    json stats = json::array();
    for (const auto& s : model.net.bn_stats()) {
        stats.push_back(
            {{"mean", std::vector<double>(s.running_mean.data(),
                                          s.running_mean.data() + s.running_mean.size())},
             {"var", std::vector<double>(s.running_var.data(),
                                         s.running_var.data() + s.running_var.size())}});
    }
    j["batchnorm"] = stats;
    j["grid"] = {{"times", model.grid.times}, {"quantized", model.grid.quantized}};
    if (model.standardization) {
        j["standardization"] = {
            {"mean", std::vector<double>(model.standardization->mean.data(),
                                         model.standardization->mean.data() +
                                             model.standardization->mean.size())},
            {"scale", std::vector<double>(model.standardization->scale.data(),
                                          model.standardization->scale.data() +
                                              model.standardization->scale.size())}};
    }
    if (!model.feature_names.empty()) j["feature_names"] = model.feature_names;
    j["epsilon"] = model.epsilon;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
    json j;
    in >> j;
    if (j.value("format", "") != "ksurv-model-v1")
        throw std::runtime_error("load_model: unrecognized model format in '" + path + "'");

    const Arch arch = arch_from_name(j.at("arch").get<std::string>());
    const int input_dim = j.at("input_dim").get<int>();
    MLPSpec spec;
    spec.hidden_layers = j.at("mlp").at("hidden_layers").get<int>();
    spec.hidden_width = j.at("mlp").at("hidden_width").get<int>();
    const double lambda = j.at("lambda").get<double>();

    const auto params_vec = j.at("parameters").get<std::vector<double>>();
    Eigen::VectorXd params =
        Eigen::Map<const Eigen::VectorXd>(params_vec.data(),
                                          static_cast<Eigen::Index>(params_vec.size()));

    std::vector<BatchNormStats> stats;
    for (const auto& s : j.at("batchnorm")) {
        BatchNormStats bs;
        const auto mean = s.at("mean").get<std::vector<double>>();
        const auto var = s.at("var").get<std::vector<double>>();
        bs.running_mean = Eigen::Map<const Eigen::VectorXd>(
            mean.data(), static_cast<Eigen::Index>(mean.size()));
        bs.running_var = Eigen::Map<const Eigen::VectorXd>(
            var.data(), static_cast<Eigen::Index>(var.size()));
        stats.push_back(std::move(bs));
    }

    ModelFile model;
    model.net = EmbeddingNet::restore(arch, input_dim, spec, lambda, std::move(params),
                                      std::move(stats));
    model.grid.times = j.at("grid").at("times").get<std::vector<double>>();
    model.grid.quantized = j.at("grid").at("quantized").get<bool>();
    if (j.contains("standardization")) {
        Standardization st;
        const auto mean = j["standardization"].at("mean").get<std::vector<double>>();
        const auto scale = j["standardization"].at("scale").get<std::vector<double>>();
        st.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                    static_cast<Eigen::Index>(mean.size()));
        st.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(),
                                                     static_cast<Eigen::Index>(scale.size()));
        model.standardization = std::move(st);
    }
    if (j.contains("feature_names"))
        model.feature_names = j["feature_names"].get<std::vector<std::string>>();
    model.epsilon = j.value("epsilon", 1e-12);
    return model;
}

}  // namespace ksa
