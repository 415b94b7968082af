#!/usr/bin/env python3
"""Regenerate the bundled demo corpus (tests/fixtures/tweets_demo.csv).

The file is synthetic but shaped like a real multilingual tweet dump:
4 languages x 3 sentiment classes x 10 rows of content, a couple of
noise-only rows that the preprocessing stage must drop, and exactly three
malformed rows that ingestion must reject. Deterministic, so the committed
fixture can always be rebuilt byte-for-byte.
"""

import csv
import random
from pathlib import Path

SEED = 20250
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "tweets_demo.csv"

PHRASES = {
    ("es", "negative"): [
        "pésimo partido, qué vergüenza",
        "muy mala experiencia con el servicio",
        "no me gustó nada la película",
        "qué desastre de organización",
        "el peor restaurante de la ciudad",
    ],
    ("es", "neutral"): [
        "el partido empieza a las nueve",
        "nada nuevo por aquí hoy",
        "el clima sigue igual que ayer",
        "la reunión se movió al martes",
        "leyendo las noticias de la mañana",
    ],
    ("es", "positive"): [
        "gran victoria del equipo hoy",
        "me encanta este lugar, volveré",
        "qué maravilla de concierto anoche",
        "excelente atención, muy recomendado",
        "día perfecto para celebrar",
    ],
    ("en", "negative"): [
        "terrible service, never again",
        "this update broke everything for me",
        "worst traffic of the whole year",
        "really disappointed with the finale",
        "awful weather ruined the trip",
    ],
    ("en", "neutral"): [
        "the meeting moved to tuesday",
        "train arrives at nine as usual",
        "reading the morning news now",
        "new schedule posted on the board",
        "the report is due next week",
    ],
    ("en", "positive"): [
        "what a fantastic match today",
        "loved the new album, great work",
        "best coffee in town, honestly",
        "brilliant performance by the team",
        "such a lovely day outside",
    ],
    ("fr", "negative"): [
        "service catastrophique, plus jamais",
        "très déçu par ce film",
        "quelle horrible journée de pluie",
        "le pire repas de ma vie",
        "organisation lamentable ce soir",
    ],
    ("fr", "neutral"): [
        "la réunion est reportée à mardi",
        "le train part à neuf heures",
        "rien de spécial aujourd'hui",
        "nouveau programme affiché ce matin",
        "je lis les nouvelles du jour",
    ],
    ("fr", "positive"): [
        "victoire magnifique ce soir",
        "j'adore ce nouvel album",
        "superbe concert hier soir",
        "excellent accueil, je recommande",
        "quelle belle journée ensoleillée",
    ],
    ("ar", "negative"): [
        "مباراة سيئة جدا اليوم",
        "خدمة رديئة ولن أعود",
        "أسوأ فيلم شاهدته هذا العام",
        "تنظيم فوضوي ومخيب للآمال",
        "طقس سيئ أفسد الرحلة",
    ],
    ("ar", "neutral"): [
        "الاجتماع انتقل إلى يوم الثلاثاء",
        "القطار يصل في التاسعة كالعادة",
        "أقرأ أخبار الصباح الآن",
        "الجدول الجديد معلق على اللوحة",
        "التقرير مطلوب الأسبوع القادم",
    ],
    ("ar", "positive"): [
        "فوز رائع للفريق اليوم",
        "أحببت الألبوم الجديد كثيرا",
        "أفضل قهوة في المدينة",
        "أداء مذهل من الجميع",
        "يوم جميل جدا للاحتفال",
    ],
}

NOISE = [
    "http://t.co/{code}",
    "https://example.com/{code}",
    "www.news.example/{code}",
    "@user{num}",
    "#trending",
    "😊",
    "🔥🔥",
    "!!!",
]

STAR_STRINGS = {
    1: ["1 star", "1 Star", "1"],
    2: ["2 stars", "2 STARS", " 2 stars "],
    3: ["3 stars", "3", "3 Stars"],
    4: ["4 stars", "4", " 4 stars"],
    5: ["5 stars", "5 Stars", "5"],
}

STARS_FOR_LABEL = {"negative": (1, 2), "neutral": (3,), "positive": (4, 5)}


def build_rows(rng: random.Random) -> list[tuple[str, str, str]]:
    rows = []
    for (language, label), phrases in PHRASES.items():
        for i in range(10):
            text = phrases[i % len(phrases)]
            if i % len(phrases) and rng.random() < 0.5:
                extra = rng.choice(NOISE).format(code=rng.randrange(100, 999), num=i)
                text = f"{text} {extra}" if rng.random() < 0.5 else f"{extra} {text}"
            stars = STARS_FOR_LABEL[label][i % len(STARS_FOR_LABEL[label])]
            rows.append((text, language, rng.choice(STAR_STRINGS[stars])))

    # Noise-only rows: valid ratings, but the text cleans down to nothing.
    rows.append(("http://t.co/abc @user1 😊", "es", "3 stars"))
    rows.append(("@fan99 https://example.com/x 🔥", "en", "5 stars"))

    rng.shuffle(rows)

    # Exactly three malformed rows, spread through the file.
    rows.insert(7, ("buen partido hoy", "es", "banana"))
    rows.insert(40, ("amazing show tonight", "en", "6 stars"))
    rows.insert(90, ("", "fr", "2 stars"))
    return rows


def main() -> None:
    rng = random.Random(SEED)
    rows = build_rows(rng)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tweet", "language", "sentiment"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
