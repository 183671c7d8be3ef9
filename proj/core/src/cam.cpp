#include "nmcsim/cam.hpp"

#include <string>

#include "nmcsim/errors.hpp"

namespace nmcsim {

CamArray::CamArray(int n_words, int word_bits, CamCosts costs)
    : n_words_(n_words), word_bits_(word_bits), costs_(costs) {
    if (n_words < 1 || word_bits < 1 || word_bits > 31) {
        throw SimError("cam", "need n_words >= 1 and 1 <= word_bits <= 31");
    }
    tag_limit_ = 1u << word_bits;
    words_.assign(static_cast<std::size_t>(n_words), 0);
}

std::uint32_t CamArray::word(int index) const {
    if (index < 0 || index >= n_words_) {
        throw SimError("cam", "word index " + std::to_string(index) + " out of range [0, " +
                                  std::to_string(n_words_) + ")");
    }
    return words_[static_cast<std::size_t>(index)];
}

void CamArray::program(int index, std::uint32_t tag) {
    if (index < 0 || index >= n_words_) {
        throw SimError("cam", "program index " + std::to_string(index) + " out of range [0, " +
                                  std::to_string(n_words_) + ")");
    }
    if (tag >= tag_limit_) {
        throw SimError("cam", "tag 0x" + std::to_string(tag) + " does not fit in " +
                                  std::to_string(word_bits_) + " bits");
    }
    words_[static_cast<std::size_t>(index)] = tag;
}

std::vector<int> CamArray::search(std::uint32_t tag, EnergyLedger* ledger) const {
    if (tag >= tag_limit_) {
        throw SimError("cam", "search tag does not fit in " + std::to_string(word_bits_) +
                                  " bits");
    }
    std::vector<int> matches;
    for (int i = 0; i < n_words_; ++i) {
        if (words_[static_cast<std::size_t>(i)] == tag) matches.push_back(i);
    }
    if (ledger) {
        ledger->charge(EnergyClass::CamSearch,
                       search_energy_j(static_cast<int>(matches.size())));
    }
    return matches;
}

double CamArray::search_energy_j(int n_matches) const {
    const int mismatches = n_words_ - n_matches;
    return n_words_ * costs_.e_precharge_j + mismatches * costs_.e_discharge_j;
}

double cam_area_um2(int n_words, int word_bits, double cell_area_um2) {
    if (n_words < 1 || word_bits < 1 || !(cell_area_um2 > 0.0)) {
        throw SimError("cam", "cam_area requires positive arguments");
    }
    return static_cast<double>(n_words) * static_cast<double>(word_bits) * cell_area_um2;
}

}  // namespace nmcsim
