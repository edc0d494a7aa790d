#include "exmerge/space.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "exmerge/error.hpp"

namespace exm {

namespace {

constexpr double kMetricTol = 1e-12;

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidInput("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

GroundSpace::GroundSpace() : GroundSpace(Kind::RealLine, 1, nullptr) {}

GroundSpace::GroundSpace(Kind kind, std::size_t dim, std::shared_ptr<const Finite> finite)
    : kind_(kind), dim_(dim), finite_(std::move(finite)) {}

GroundSpace GroundSpace::real_line() { return GroundSpace(); }

GroundSpace GroundSpace::euclidean(std::size_t dim) {
  if (dim < 1) throw InvalidInput("euclidean space needs dim >= 1");
  return GroundSpace(Kind::EuclideanRd, dim, nullptr);
}

GroundSpace GroundSpace::finite(std::vector<std::string> labels, std::vector<double> distance) {
  const std::size_t k = labels.size();
  if (k == 0) throw InvalidInput("finite space needs at least one label");
  if (distance.size() != k * k) throw InvalidInput("distance matrix must be K x K");
  for (std::size_t i = 0; i < k; ++i) {
    if (labels[i].empty() || labels[i].find_first_of(" \t,;") != std::string::npos) {
      throw InvalidInput("label '" + labels[i] + "' must be nonempty without blanks, ',' or ';'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (labels[i] == labels[j]) throw InvalidInput("duplicate label '" + labels[i] + "'");
    }
  }
  auto at = [&](std::size_t i, std::size_t j) { return distance[i * k + j]; };
  for (std::size_t i = 0; i < k; ++i) {
    if (at(i, i) != 0.0) throw InvalidInput("distance matrix must have zero diagonal");
    for (std::size_t j = 0; j < k; ++j) {
      const double d = at(i, j);
      if (!std::isfinite(d) || d < 0.0) throw InvalidInput("distances must be finite and >= 0");
      if (i != j && d <= 0.0) throw InvalidInput("distinct labels must have positive distance");
      if (d != at(j, i)) throw InvalidInput("distance matrix must be symmetric");
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t l = 0; l < k; ++l)
        if (at(i, l) > at(i, j) + at(j, l) + kMetricTol)
          throw InvalidInput("distance matrix violates the triangle inequality");
  auto block = std::make_shared<const Finite>(Finite{std::move(labels), std::move(distance)});
  return GroundSpace(Kind::FiniteLabeled, 1, std::move(block));
}

GroundSpace GroundSpace::discrete(std::vector<std::string> labels) {
  const std::size_t k = labels.size();
  std::vector<double> d(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) d[i * k + i] = 0.0;
  return finite(std::move(labels), std::move(d));
}

GroundSpace GroundSpace::discrete(std::size_t k) {
  std::vector<std::string> labels;
  labels.reserve(k);
  for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(i));
  return discrete(std::move(labels));
}

std::size_t GroundSpace::label_count() const { return finite_ ? finite_->labels.size() : 0; }

const std::vector<std::string>& GroundSpace::labels() const {
  static const std::vector<std::string> kNone;
  return finite_ ? finite_->labels : kNone;
}

std::optional<std::size_t> GroundSpace::label_index(std::string_view label) const {
  if (!finite_) return std::nullopt;
  const auto& ls = finite_->labels;
  const auto it = std::find(ls.begin(), ls.end(), label);
  if (it == ls.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ls.begin());
}

double GroundSpace::label_distance(std::size_t i, std::size_t j) const {
  return finite_->distance[i * finite_->labels.size() + j];
}

double GroundSpace::distance(std::span<const double> a, std::span<const double> b) const {
  switch (kind_) {
    case Kind::RealLine:
      return std::abs(a[0] - b[0]);
    case Kind::EuclideanRd: {
      double s = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double t = a[i] - b[i];
        s += t * t;
      }
      return std::sqrt(s);
    }
    case Kind::FiniteLabeled:
      return label_distance(static_cast<std::size_t>(a[0]), static_cast<std::size_t>(b[0]));
  }
  return 0.0;
}

bool GroundSpace::contains(std::span<const double> p) const {
  if (p.size() != dim_) return false;
  if (kind_ == Kind::FiniteLabeled) {
    const double v = p[0];
    return v >= 0.0 && v == std::floor(v) && v < static_cast<double>(label_count());
  }
  return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
}

void GroundSpace::check(std::span<const double> p) const {
  if (!contains(p)) throw InvalidInput("point does not belong to space " + describe());
}

std::string GroundSpace::format_point(std::span<const double> p) const {
  if (kind_ == Kind::FiniteLabeled) return finite_->labels.at(static_cast<std::size_t>(p[0]));
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ',';
    os << p[i];
  }
  return os.str();
}

Point GroundSpace::parse_point(std::string_view text) const {
  text = trim(text);
  if (kind_ == Kind::FiniteLabeled) {
    const auto idx = label_index(text);
    if (!idx) throw InvalidInput("unknown label '" + std::string(text) + "'");
    return label_point(*idx);
  }
  Point p;
  for (auto part : split(text, ',')) p.push_back(parse_double(part));
  check(p);
  return p;
}

std::string GroundSpace::describe() const {
  switch (kind_) {
    case Kind::RealLine:
      return "real";
    case Kind::EuclideanRd:
      return "rd " + std::to_string(dim_);
    case Kind::FiniteLabeled: {
      std::ostringstream os;
      os.precision(17);
      os << "labels ";
      const auto& ls = finite_->labels;
      for (std::size_t i = 0; i < ls.size(); ++i) os << (i ? "," : "") << ls[i];
      bool discrete01 = true;
      for (std::size_t i = 0; i < ls.size(); ++i)
        for (std::size_t j = 0; j < ls.size(); ++j)
          if (i != j && label_distance(i, j) != 1.0) discrete01 = false;
      if (!discrete01) {
        os << "; distance ";
        for (std::size_t i = 0; i < finite_->distance.size(); ++i)
          os << (i ? "," : "") << finite_->distance[i];
      }
      return os.str();
    }
  }
  return {};
}

GroundSpace GroundSpace::from_description(std::string_view text) {
  text = trim(text);
  if (text == "real") return real_line();
  if (text.starts_with("rd")) {
    const double d = parse_double(text.substr(2));
    if (d < 1 || d != std::floor(d)) throw InvalidInput("bad dimension in '" + std::string(text) + "'");
    return euclidean(static_cast<std::size_t>(d));
  }
  if (text.starts_with("labels")) {
    auto rest = text.substr(6);
    std::string_view dist_part;
    if (const auto semi = rest.find(';'); semi != std::string_view::npos) {
      dist_part = trim(rest.substr(semi + 1));
      rest = rest.substr(0, semi);
    }
    std::vector<std::string> labels;
    for (auto l : split(trim(rest), ',')) labels.emplace_back(trim(l));
    if (dist_part.empty()) return discrete(std::move(labels));
    if (!dist_part.starts_with("distance")) throw InvalidInput("expected 'distance' after ';'");
    std::vector<double> d;
    for (auto v : split(trim(dist_part.substr(8)), ',')) d.push_back(parse_double(v));
    return finite(std::move(labels), std::move(d));
  }
  throw InvalidInput("unknown space description '" + std::string(text) + "'");
}

bool GroundSpace::operator==(const GroundSpace& other) const {
  if (kind_ != other.kind_ || dim_ != other.dim_) return false;
  if (kind_ != Kind::FiniteLabeled) return true;
  if (finite_ == other.finite_) return true;
  return finite_->labels == other.finite_->labels && finite_->distance == other.finite_->distance;
}

void require_same_space(const GroundSpace& a, const GroundSpace& b, std::string_view what) {
  if (!(a == b)) {
    throw InvalidInput(std::string(what) + ": measures live on different spaces (" + a.describe() +
                       " vs " + b.describe() + ")");
  }
}

}  // namespace exm
