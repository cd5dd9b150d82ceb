#include <algorithm>
#include <cstdio>
#include <sstream>

#include "flowgest/error.hpp"
#include "flowgest/eval.hpp"

namespace flowgest::eval {

namespace {

const char* kCanonicalTasks[3] = {"Suturing", "NeedlePassing", "KnotTying"};
const char* kColumnTitles[3] = {"Suturing", "Needle Passing", "Knot Tying"};

std::string format_cell(const TaskReport& r) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f \xC2\xB1 %.2f", r.mean, r.stddev);  // mm.mm ± s.ss
    return buf;
}

}  // namespace

std::vector<TaskReport> published_baseline() {
    const char* method = "BN-ResNet101 flow-only (published)";
    std::vector<TaskReport> out;
    TaskReport s;
    s.method = method;
    s.task = "Suturing";
    s.mean = 91.07;
    s.stddev = 0.67;
    out.push_back(s);
    TaskReport np;
    np.method = method;
    np.task = "NeedlePassing";
    np.mean = 74.25;
    np.stddev = 3.66;
    out.push_back(np);
    TaskReport kt;
    kt.method = method;
    kt.task = "KnotTying";
    kt.mean = 87.78;
    kt.stddev = 3.44;
    out.push_back(kt);
    return out;
}

std::string emit_report_text(const std::vector<TaskReport>& reports) {
    // column set: the three canonical tasks, then any others in input order
    std::vector<std::string> tasks(kCanonicalTasks, kCanonicalTasks + 3);
    std::vector<std::string> titles(kColumnTitles, kColumnTitles + 3);
    std::vector<std::string> methods;
    for (const auto& r : reports) {
        if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) {
            tasks.push_back(r.task);
            titles.push_back(r.task);
        }
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
    }

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Method", "Evaluation"});
    for (const auto& t : titles) rows.back().push_back(t);
    for (const auto& m : methods) {
        std::vector<std::string> row{m, "Accuracy \xC2\xB1 std"};
        for (const auto& t : tasks) {
            auto it = std::find_if(reports.begin(), reports.end(), [&](const TaskReport& r) {
                return r.method == m && r.task == t;
            });
            row.push_back(it == reports.end() ? "\xE2\x80\x94" : format_cell(*it));
        }
        rows.push_back(std::move(row));
    }

    std::vector<size_t> widths(rows[0].size(), 0);
    auto display_width = [](const std::string& s) {
        size_t w = 0;
        for (unsigned char c : s)
            if ((c & 0xC0) != 0x80) ++w;  // count UTF-8 code points
        return w;
    };
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], display_width(row[i]));

    std::ostringstream out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << " | ";
            out << row[i] << std::string(widths[i] - display_width(row[i]), ' ');
        }
        out << "\n";
    }
    return out.str();
}

std::string emit_report_csv(const std::vector<TaskReport>& reports) {
    std::ostringstream out;
    out << "method,task,mean,std,fold_accuracies\n";
    out.precision(17);
    for (const auto& r : reports) {
        out << r.method << ',' << r.task << ',' << r.mean << ',' << r.stddev << ',';
        for (size_t i = 0; i < r.fold_acc.size(); ++i) {
            if (i) out << ';';
            out << r.fold_acc[i];
        }
        out << "\n";
    }
    return out.str();
}

std::vector<TaskReport> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("method,task,mean,std", 0) != 0)
        fail("parse_report_csv: bad header");
    std::vector<TaskReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 5) fail("parse_report_csv: expected 5 fields in '" + line + "'");
        TaskReport r;
        r.method = f[0];
        r.task = f[1];
        try {
            r.mean = std::stod(f[2]);
            r.stddev = std::stod(f[3]);
            std::string acc;
            std::istringstream as(f[4]);
            while (std::getline(as, acc, ';'))
                if (!acc.empty()) r.fold_acc.push_back(std::stod(acc));
        } catch (const std::exception&) {
            fail("parse_report_csv: bad number in '" + line + "'");
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace flowgest::eval
