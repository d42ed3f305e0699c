#include "mtavg/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

namespace mtavg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

double parse_number(const std::string& cell, std::size_t line_no) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    while (ptr < end && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error("non-numeric cell '" + cell + "' on line " +
                                 std::to_string(line_no));
    return value;
}

struct PooledMoments {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd stddev;
};

PooledMoments pooled_moments(const std::vector<Bag>& bags) {
    const Eigen::Index d = common_dim(bags);
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(d);
    Eigen::RowVectorXd sumsq = Eigen::RowVectorXd::Zero(d);
    double n = 0.0;
    for (const Bag& b : bags) {
        sum += b.samples.colwise().sum();
        sumsq += b.samples.array().square().colwise().sum().matrix();
        n += static_cast<double>(b.size());
    }
    PooledMoments m;
    m.mean = sum / n;
    m.stddev = (sumsq / n - m.mean.cwiseProduct(m.mean)).cwiseMax(0.0).cwiseSqrt();
    return m;
}

}  // namespace

std::vector<Bag> load_bags_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file '" + path + "'");
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "bag_id")
        throw std::runtime_error("expected header bag_id,f0,... in '" + path + "'");
    const std::size_t d = header.size() - 1;

    // rows grouped or groupable by bag_id: collect per id, preserving order
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<std::vector<double>>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != d + 1)
            throw std::runtime_error("ragged row on line " + std::to_string(line_no) +
                                     " of '" + path + "'");
        std::vector<double> vals(d);
        for (std::size_t j = 0; j < d; ++j) vals[j] = parse_number(cells[j + 1], line_no);
        auto it = rows.find(cells[0]);
        if (it == rows.end()) {
            order.push_back(cells[0]);
            rows[cells[0]].push_back(std::move(vals));
        } else {
            it->second.push_back(std::move(vals));
        }
    }
    if (order.empty()) throw std::runtime_error("no data rows in '" + path + "'");

    std::vector<Bag> bags;
    bags.reserve(order.size());
    for (const std::string& id : order) {
        const auto& list = rows[id];
        Eigen::MatrixXd samples(static_cast<Eigen::Index>(list.size()),
                                static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < list.size(); ++r)
            for (std::size_t j = 0; j < d; ++j)
                samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                    list[r][j];
        bags.emplace_back(id, std::move(samples));
    }
    return bags;
}

void save_bags_csv(const std::string& path, const std::vector<Bag>& bags) {
    const Eigen::Index d = common_dim(bags);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "bag_id";
    for (Eigen::Index j = 0; j < d; ++j) out << ",f" << j;
    out << "\n";
    char buf[40];
    for (const Bag& b : bags) {
        for (Eigen::Index r = 0; r < b.size(); ++r) {
            out << b.id;
            for (Eigen::Index j = 0; j < d; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", b.samples(r, j));
                out << ',' << buf;
            }
            out << "\n";
        }
    }
}

FeatureTransform standardize(std::vector<Bag>& bags) {
    PooledMoments m = pooled_moments(bags);
    for (Eigen::Index j = 0; j < m.stddev.size(); ++j)
        if (m.stddev(j) <= 0.0)
            throw std::runtime_error("feature f" + std::to_string(j) +
                                     " has zero pooled variance");
    for (Bag& b : bags) {
        b.samples.rowwise() -= m.mean;
        b.samples.array().rowwise() /= m.stddev.array();
    }
    return {m.mean, m.stddev};
}

double average_feature_stddev(const std::vector<Bag>& bags) {
    return pooled_moments(bags).stddev.mean();
}

}  // namespace mtavg
