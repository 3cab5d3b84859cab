#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <zlib.h>

#include "ltai/error.hpp"
#include "ltai/trainer.hpp"

namespace ltai {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'L', 'T', 'A', 'I', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

template <typename T>
void put(std::string& buf, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw CheckpointError("checkpoint truncated");
    T value;
    std::memcpy(&value, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

struct ArrayRef {
    const char* name;
    Eigen::Index rows;
    Eigen::Index cols;
    const double* data;
};

json hyper_to_json(const HyperParams& h) {
    return json{{"topics", h.topics},   {"alpha_theta", h.alpha_theta}, {"alpha_beta", h.alpha_beta},
                {"alpha_eta", h.alpha_eta}, {"c_plus", h.c_plus},     {"c_minus", h.c_minus},
                {"sv", h.sv},           {"se", h.se},                   {"ss", h.ss},
                {"sa", h.sa}};
}

HyperParams hyper_from_json(const json& j) {
    HyperParams h;
    h.topics = j.at("topics").get<std::size_t>();
    h.alpha_theta = j.at("alpha_theta").get<double>();
    h.alpha_beta = j.at("alpha_beta").get<double>();
    h.alpha_eta = j.at("alpha_eta").get<double>();
    h.c_plus = j.at("c_plus").get<double>();
    h.c_minus = j.at("c_minus").get<double>();
    h.sv = j.at("sv").get<std::size_t>();
    h.se = j.at("se").get<std::size_t>();
    h.ss = j.at("ss").get<std::size_t>();
    h.sa = j.at("sa").get<std::size_t>();
    return h;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
    std::vector<double> pi_flat;
    for (const auto& row : model.authors.pi) pi_flat.insert(pi_flat.end(), row.begin(), row.end());

    const auto& c = model.content;
    const std::vector<ArrayRef> arrays = {
        {"gamma", c.gamma.rows(), c.gamma.cols(), c.gamma.data()},
        {"lambda", c.lambda.rows(), c.lambda.cols(), c.lambda.data()},
        {"phi_bar", c.phi_bar.rows(), c.phi_bar.cols(), c.phi_bar.data()},
        {"eta", model.authors.eta.rows(), model.authors.eta.cols(), model.authors.eta.data()},
        {"pi", static_cast<Eigen::Index>(pi_flat.size()), 1, pi_flat.data()},
    };

    json header;
    header["ground_truth"] = model.ground_truth;
    header["mode"] = mode_name(model.mode);
    header["seed"] = model.seed;
    header["iteration"] = model.iteration;
    header["doc_updates"] = model.doc_updates;
    header["hyper"] = hyper_to_json(model.hyper);
    header["learning_rate"] = {{"tau0", model.rate.tau0}, {"kappa", model.rate.kappa}};
    header["vocabulary"] = model.vocabulary;
    header["doc_ids"] = model.doc_ids;
    header["author_names"] = model.author_names;
    header["doc_authors"] = model.doc_authors;
    header["doc_citations"] = model.doc_citations;
    json layout = json::array();
    std::uint64_t offset = 0;
    for (const auto& a : arrays) {
        layout.push_back({{"name", a.name}, {"rows", a.rows}, {"cols", a.cols}, {"offset", offset}});
        offset += static_cast<std::uint64_t>(a.rows * a.cols) * sizeof(double);
    }
    header["arrays"] = layout;
    const std::string header_text = header.dump();

    std::string buf(kMagic, sizeof(kMagic));
    put<std::uint32_t>(buf, kCheckpointVersion);
    put<std::uint64_t>(buf, header_text.size());
    buf += header_text;
    for (const auto& a : arrays)
        buf.append(reinterpret_cast<const char*>(a.data), static_cast<std::size_t>(a.rows * a.cols) * sizeof(double));
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
    put<std::uint32_t>(buf, crc);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("write failed for " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < sizeof(kMagic) || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("not a checkpoint file: " + path.string());
    std::size_t pos = sizeof(kMagic);
    const auto version = get<std::uint32_t>(buf, pos);
    if (version != kCheckpointVersion)
        throw CheckpointVersionError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                     std::to_string(kCheckpointVersion) + ")");

    if (buf.size() < pos + sizeof(std::uint32_t)) throw CheckpointError("checkpoint truncated");
    std::size_t end = buf.size() - sizeof(std::uint32_t);
    std::size_t crc_pos = end;
    const auto stored = get<std::uint32_t>(buf, crc_pos);
    const auto actual = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(end)));
    if (stored != actual) throw CheckpointError("checkpoint checksum mismatch (corrupt or truncated)");

    const auto header_len = get<std::uint64_t>(buf, pos);
    if (pos + header_len > end) throw CheckpointError("checkpoint truncated");
    json header;
    try {
        header = json::parse(buf.substr(pos, header_len));
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint header unreadable: ") + e.what());
    }
    pos += header_len;
    const std::size_t payload = pos;

    TrainedModel model;
    try {
        model.ground_truth = header.at("ground_truth").get<bool>();
        model.mode = parse_mode(header.at("mode").get<std::string>());
        model.seed = header.at("seed").get<std::uint64_t>();
        model.iteration = header.at("iteration").get<std::uint64_t>();
        model.doc_updates = header.at("doc_updates").get<std::uint64_t>();
        model.hyper = hyper_from_json(header.at("hyper"));
        model.rate.tau0 = header.at("learning_rate").at("tau0").get<double>();
        model.rate.kappa = header.at("learning_rate").at("kappa").get<double>();
        model.vocabulary = header.at("vocabulary").get<std::vector<std::string>>();
        model.doc_ids = header.at("doc_ids").get<std::vector<std::string>>();
        model.author_names = header.at("author_names").get<std::vector<std::string>>();
        model.doc_authors = header.at("doc_authors").get<std::vector<std::vector<std::size_t>>>();
        model.doc_citations = header.at("doc_citations").get<std::vector<std::size_t>>();

        auto read = [&](const std::string& name) {
            for (const auto& a : header.at("arrays")) {
                if (a.at("name").get<std::string>() != name) continue;
                const auto rows = a.at("rows").get<Eigen::Index>();
                const auto cols = a.at("cols").get<Eigen::Index>();
                const auto offset = a.at("offset").get<std::uint64_t>();
                const std::size_t bytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
                if (payload + offset + bytes > end) throw CheckpointError("array " + name + " exceeds payload");
                Matrix m(rows, cols);
                std::memcpy(m.data(), buf.data() + payload + offset, bytes);
                return m;
            }
            throw CheckpointError("checkpoint lacks array " + name);
        };
        model.content.gamma = read("gamma");
        model.content.lambda = read("lambda");
        model.content.phi_bar = read("phi_bar");
        model.authors.eta = read("eta");
        const Matrix pi = read("pi");
        std::size_t n = 0;
        model.authors.pi.resize(model.doc_authors.size());
        for (std::size_t i = 0; i < model.doc_authors.size(); ++i) {
            model.authors.pi[i].resize(model.doc_authors[i].size());
            for (double& v : model.authors.pi[i]) {
                if (n >= static_cast<std::size_t>(pi.rows())) throw CheckpointError("pi array too short");
                v = pi(static_cast<Eigen::Index>(n++), 0);
            }
        }
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint header malformed: ") + e.what());
    }
    return model;
}

}  // namespace ltai
