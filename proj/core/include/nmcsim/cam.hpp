#pragma once

#include <cstdint>
#include <vector>

#include "nmcsim/ledger.hpp"

namespace nmcsim {

// Functional and cost model of a binary tag-match memory with a
// pre-charge-high match line: every search precharges all match lines, and
// each mismatching word discharges its line. Matches therefore cost nothing
// beyond the precharge.

struct CamCosts {
    double e_precharge_j = 0.5e-15;  // per word per search
    double e_discharge_j = 1.0e-15;  // per mismatching word per search
};

class CamArray {
public:
    CamArray(int n_words = 64, int word_bits = 12, CamCosts costs = {});

    int n_words() const { return n_words_; }
    int word_bits() const { return word_bits_; }
    std::uint32_t tag_limit() const { return tag_limit_; }
    std::uint32_t word(int index) const;
    const std::vector<std::uint32_t>& words() const { return words_; }

    // Store `tag` at `index`; both bounds-checked.
    void program(int index, std::uint32_t tag);

    // All word indices whose stored tag equals `tag`. Charges one search to
    // the ledger when one is given: n_words * E_pre + (mismatches) * E_dis.
    std::vector<int> search(std::uint32_t tag, EnergyLedger* ledger = nullptr) const;

    // Energy one search over this array costs, given how many words match.
    double search_energy_j(int n_matches) const;

private:
    int n_words_;
    int word_bits_;
    std::uint32_t tag_limit_;
    CamCosts costs_;
    std::vector<std::uint32_t> words_;
};

// n_words * word_bits * cell_area.
double cam_area_um2(int n_words, int word_bits, double cell_area_um2);

}  // namespace nmcsim
