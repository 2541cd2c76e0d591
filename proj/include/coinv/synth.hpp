#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "coinv/citation.hpp"
#include "coinv/error.hpp"
#include "coinv/ingest.hpp"

namespace coinv {

// Planted-partition cohort generator. Teams are drawn from a home community,
// each member coming from outside with probability epsilon, where epsilon is
// the expected share of a node's planted edges that leave its community:
//   epsilon = p_out (N - s) / (p_in (s - 1) + p_out (N - s)).
struct SynthConfig {
  std::vector<std::size_t> community_sizes{50, 50, 50, 50};
  double within_p = 0.3;
  double between_p = 0.01;
  // Mean number of cohort patents per inventor; 0 derives it from the
  // expected planted degree: (p_in (s-1) + p_out (N-s)) / (mean team - 1).
  double patents_per_inventor = 0.0;
  std::size_t team_min = 2;
  std::size_t team_max = 4;
  // Base first-citation lag in months: shift + exp(N(mu, sigma^2)).
  double lag_shift = -6.0;
  double lag_mu = 3.2188758248682006;  // ln 25
  double lag_sigma = 0.55;
  double in_community_advantage = 0.0;  // months subtracted from in-community lags
  double self_fraction = 0.1;
  double in_fraction = 0.45;  // out-of-community takes the remainder
  std::size_t citations_per_patent = 1;
  int start_year = 1995;
  int years = 5;
  std::string cohort_class = "257";
  std::uint64_t seed = 0;
};

inline void validate(const SynthConfig& c) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (c.community_sizes.empty()) throw InfeasibleConfig("no communities");
  for (auto s : c.community_sizes)
    if (s == 0) throw InfeasibleConfig("community sizes must be positive");
  if (!prob(c.within_p) || !prob(c.between_p)) throw InfeasibleConfig("edge probabilities must lie in [0, 1]");
  if (!prob(c.self_fraction) || !prob(c.in_fraction) || c.self_fraction + c.in_fraction > 1.0)
    throw InfeasibleConfig("citation type fractions must lie in [0, 1] and sum to at most 1");
  if (c.in_community_advantage < 0.0) throw InfeasibleConfig("advantage must be nonnegative");
  if (c.team_min < 1 || c.team_max < c.team_min) throw InfeasibleConfig("bad team size range");
  if (!(c.lag_sigma > 0.0)) throw InfeasibleConfig("lag sigma must be positive");
  if (c.years < 1) throw InfeasibleConfig("years must be positive");
  const auto smallest = *std::min_element(c.community_sizes.begin(), c.community_sizes.end());
  // In-community citers are drawn from the home community outside the team.
  if (c.team_max + 1 > smallest)
    throw InfeasibleConfig("team size " + std::to_string(c.team_max) + " does not fit community of size " +
                           std::to_string(smallest));
  if (c.community_sizes.size() < 2 && (c.between_p > 0.0 || c.self_fraction + c.in_fraction < 1.0))
    throw InfeasibleConfig("out-of-community draws need at least two communities");
  if (c.within_p == 0.0 && c.between_p == 0.0 && c.patents_per_inventor <= 0.0)
    throw InfeasibleConfig("zero edge probabilities leave no patents");
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthConfig, community_sizes, within_p, between_p,
                                                patents_per_inventor, team_min, team_max, lag_shift, lag_mu,
                                                lag_sigma, in_community_advantage, self_fraction, in_fraction,
                                                citations_per_patent, start_year, years, cohort_class, seed)

struct SynthCitation {
  std::string citing_id;
  std::string cited_id;
  CitationCategory planted_category;
  double lag_months;
};

struct SynthData {
  std::vector<PatentRecord> patents;  // cohort and citing patents, sorted by id
  std::vector<InventorLink> links;
  std::vector<CitationRecord> citations;
  std::unordered_map<std::string, std::uint32_t> planted;  // inventor -> community
  std::vector<SynthCitation> truth;
  double epsilon = 0.0;
};

inline std::string synth_key(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, i);
  return buf;
}

inline SynthData generate(const SynthConfig& config) {
  validate(config);
  using namespace std::chrono;
  std::mt19937_64 rng(config.seed);
  SynthData out;

  const auto k = config.community_sizes.size();
  const std::size_t n = std::accumulate(config.community_sizes.begin(), config.community_sizes.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> members(k);
  std::vector<std::uint32_t> community_of(n);
  std::vector<std::string> inventor(n);
  for (std::size_t c = 0, next = 0; c < k; ++c) {
    for (std::size_t j = 0; j < config.community_sizes[c]; ++j, ++next) {
      members[c].push_back(next);
      community_of[next] = static_cast<std::uint32_t>(c);
      inventor[next] = synth_key('I', next);
      out.planted.emplace(inventor[next], static_cast<std::uint32_t>(c));
    }
  }

  const double mean_size = static_cast<double>(n) / static_cast<double>(k);
  const double inside = config.within_p * (mean_size - 1.0);
  const double outside = config.between_p * (static_cast<double>(n) - mean_size);
  out.epsilon = inside + outside > 0.0 ? outside / (inside + outside) : 0.0;
  const double mean_team = 0.5 * static_cast<double>(config.team_min + config.team_max);
  double per_inventor = config.patents_per_inventor;
  if (per_inventor <= 0.0) per_inventor = (inside + outside) / std::max(mean_team - 1.0, 1.0);
  const auto cohort_size = static_cast<std::size_t>(std::llround(static_cast<double>(n) * per_inventor / mean_team));

  std::discrete_distribution<std::size_t> pick_home(config.community_sizes.begin(), config.community_sizes.end());
  std::uniform_int_distribution<std::size_t> pick_team(config.team_min, config.team_max);
  std::uniform_int_distribution<int> pick_month(0, config.years * 12 - 1);
  std::uniform_int_distribution<int> pick_pendency(12, 36);
  std::bernoulli_distribution outsider(out.epsilon);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const sys_days origin{year{config.start_year} / January / 1};

  auto month_offset = [](sys_days from, int months) {
    year_month_day ymd{from};
    return sys_days{year_month_day{ymd.year() / ymd.month() / ymd.day()} + std::chrono::months{months}};
  };
  auto pick_from = [&](const std::vector<std::size_t>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  auto pick_outside = [&](std::size_t home) {
    while (true) {
      const auto i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      if (community_of[i] != home) return i;
    }
  };

  struct CohortPatent {
    std::string id;
    std::size_t home;
    std::vector<std::size_t> team;
    sys_days grant;
  };
  std::vector<CohortPatent> cohort;
  for (std::size_t p = 0; p < cohort_size; ++p) {
    CohortPatent cp;
    cp.id = synth_key('P', p);
    cp.home = pick_home(rng);
    const auto size = pick_team(rng);
    while (cp.team.size() < size) {
      const auto candidate =
          (!cp.team.empty() && k > 1 && outsider(rng)) ? pick_outside(cp.home) : pick_from(members[cp.home]);
      if (std::find(cp.team.begin(), cp.team.end(), candidate) == cp.team.end()) cp.team.push_back(candidate);
    }
    cp.grant = month_offset(origin, pick_month(rng));
    const auto application = month_offset(cp.grant, -pick_pendency(rng));
    out.patents.push_back({cp.id, cp.grant, application, config.cohort_class, "FIRM" + std::to_string(cp.home)});
    for (auto i : cp.team) out.links.push_back({cp.id, inventor[i]});
    cohort.push_back(std::move(cp));
  }

  std::size_t citing_count = 0;
  for (const auto& cp : cohort) {
    for (std::size_t j = 0; j < config.citations_per_patent; ++j) {
      const double u = unit(rng);
      const auto category = u < config.self_fraction                      ? CitationCategory::self
                            : u < config.self_fraction + config.in_fraction ? CitationCategory::in_community
                                                                            : CitationCategory::out_of_community;
      std::size_t citer = 0;
      if (category == CitationCategory::self) {
        citer = pick_from(cp.team);
      } else if (category == CitationCategory::in_community) {
        do {
          citer = pick_from(members[cp.home]);
        } while (std::find(cp.team.begin(), cp.team.end(), citer) != cp.team.end());
      } else {
        std::vector<std::uint32_t> covered;
        for (auto i : cp.team) covered.push_back(community_of[i]);
        std::vector<std::size_t> pool;
        for (std::size_t c = 0; c < k; ++c)
          if (std::find(covered.begin(), covered.end(), c) == covered.end()) pool.push_back(c);
        if (pool.empty()) {
          for (std::size_t c = 0; c < k; ++c)
            if (c != cp.home) pool.push_back(c);
        }
        citer = pick_from(members[pick_from(pool)]);
      }
      double lag = config.lag_shift + std::exp(config.lag_mu + config.lag_sigma * normal(rng));
      if (category == CitationCategory::in_community) lag -= config.in_community_advantage;
      const auto days = static_cast<int>(std::lround(lag * kDaysPerMonth));
      const sys_days applied = cp.grant + std::chrono::days{days};
      const auto citing_id = synth_key('C', citing_count++);
      out.patents.push_back({citing_id, month_offset(applied, 24), applied, "999", std::nullopt});
      out.links.push_back({citing_id, inventor[citer]});
      out.citations.push_back({citing_id, cp.id});
      out.truth.push_back({citing_id, cp.id, category, lag_months(cp.grant, applied)});
    }
  }

  std::sort(out.patents.begin(), out.patents.end(),
            [](const auto& a, const auto& b) { return a.patent_id < b.patent_id; });
  std::sort(out.links.begin(), out.links.end());
  std::sort(out.citations.begin(), out.citations.end());
  return out;
}

// Writes patents.tsv, links.tsv, citations.tsv and planted.tsv under `dir`.
inline void write_synth(const std::filesystem::path& dir, const SynthData& data) {
  std::filesystem::create_directories(dir);
  write_patents((dir / "patents.tsv").string(), data.patents);
  write_links((dir / "links.tsv").string(), data.links);
  write_citations((dir / "citations.tsv").string(), data.citations);
  std::vector<std::pair<std::string, std::uint32_t>> planted(data.planted.begin(), data.planted.end());
  std::sort(planted.begin(), planted.end());
  auto out = detail::open_for_write((dir / "planted.tsv").string());
  for (const auto& [inv, c] : planted) out << inv << '\t' << c << '\n';
}

}  // namespace coinv
