// Writes the planted-partition fixture as TSV.
#include "fixtures.hpp"

#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixture <out.tsv>\n";
        return 1;
    }
    fixtures::write_tsv(argv[1], fixtures::planted_partition().triples);
}
