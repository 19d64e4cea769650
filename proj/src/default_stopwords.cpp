#include <string_view>

#include "arsent/textprep.hpp"

namespace arsent {
namespace {

// Function words of MSA and Levantine colloquial usage. Negators (لا لم لن
// ليس ما مش ولا) are deliberately absent: they carry polarity.
constexpr std::string_view kWords[] = {
    "من",    "الى",   "إلى",   "عن",    "على",   "علي",   "في",    "مع",
    "حتى",   "منذ",   "ثم",    "او",    "أو",    "ام",    "بل",    "لكن",
    "ولكن",  "ان",    "أن",    "إن",    "انه",   "انها",  "كان",   "كانت",
    "يكون",  "تكون",  "هو",    "هي",    "هم",    "هن",    "هما",   "انا",
    "نحن",   "انت",   "انتم",  "انتي",  "هذا",   "هذه",   "ذلك",   "تلك",
    "هذي",   "هاد",   "هادا",  "هاي",   "هدول",  "هؤلاء", "اولئك", "الذي",
    "التي",  "الذين", "اللي",  "ماذا",  "متى",   "اين",   "كيف",   "لماذا",
    "كم",    "أي",    "كل",    "بعض",   "غير",   "قد",    "لقد",   "عند",
    "لدى",   "بين",   "فوق",   "تحت",   "امام",  "خلف",   "حول",   "دون",
    "قبل",   "بعد",   "إذا",   "اذا",   "لو",    "كي",    "لأن",   "حيث",
    "عندما", "بينما", "كما",   "مثل",   "أيضا",  "فقط",   "يا",    "أما",
    "إلا",   "سوف",   "له",    "لها",   "لهم",   "لنا",   "لك",    "لي",
    "به",    "بها",   "بهم",   "فيه",   "فيها",  "فيهم",  "منه",   "منها",
    "منهم",  "عليه",  "عليها", "عليهم", "إليه",  "إليها", "عنه",   "عنها",
    "هناك",  "هنا",   "كذلك",  "وهو",   "وهي",   "وقد",   "وكان",  "وفي",
    "ومن",   "يعني",  "شو",    "ايش",   "وين",   "ليش",   "كمان",  "هيك",
    "عشان",  "علشان", "زي",    "مثلا",  "الي",   "و",
};

}  // namespace

const Stoplist& default_stoplist() {
  static const Stoplist list = [] {
    Stoplist s;
    for (std::string_view w : kWords) s.insert(normalize(w));
    return s;
  }();
  return list;
}

}  // namespace arsent
