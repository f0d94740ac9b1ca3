#!/usr/bin/env python3
"""Generate the synthetic evaluation corpus under fixtures/synthetic/.

20 publications, 3 datasets, 60 variables. 18 publication sentences are
verbatim question texts of variables from a linked dataset (the gold links),
and 4 further sentences use measurement vocabulary without quoting any
variable. Output is deterministic.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "synthetic"
RNG = random.Random(20240611)

QUESTIONS_A = [
    ("Trust in police", "How much confidence do you place in the local police force?"),
    ("Parliament approval", "Do you approve of the way parliament handles legislation these days?"),
    ("Voting intention", "Which party would receive your ballot if an election were held tomorrow?"),
    ("Protest participation", "Have you joined a street demonstration during the past twelve months?"),
    ("Newspaper reading", "On how many weekdays do you read a printed newspaper?"),
    ("Left-right placement", "Where would you place yourself on a left to right political spectrum?"),
    ("Union membership", "Are you currently a member of a trade union?"),
    ("Court fairness", "Do judges treat wealthy and poor defendants equally?"),
    ("Immigration attitude", "Should the government admit more refugees fleeing war?"),
    ("Satisfaction with democracy", "Overall, are you satisfied with how democracy works in this country?"),
    ("Party identification", "Do you feel close to any particular political party?"),
    ("Petition signing", "Did you sign an online petition within the last year?"),
    ("Corruption perception", "How widespread is bribery among public officials?"),
    ("European integration", "Should European unification be pushed further or has it gone too far?"),
    ("Tax fairness", "Are income taxes distributed justly between rich and poor households?"),
    ("Military spending", "Ought defence budgets to grow, shrink, or remain unchanged?"),
    ("Internet politics", "Do you follow campaign coverage on social media platforms?"),
    ("Mayor contact", "Have you ever written a letter to your mayor?"),
    ("Referendum support", "Would you favour national referendums on major treaties?"),
    ("Civic duty", "Is casting a vote a civic obligation for every citizen?"),
]

QUESTIONS_B = [
    ("Self-rated health", "Would you describe your physical wellbeing as excellent, good, fair, or poor?"),
    ("Sleep duration", "How many hours of sleep do you usually get at night?"),
    ("Smoking status", "Do you smoke cigarettes daily, occasionally, or not at all?"),
    ("Alcohol frequency", "How often do you drink beer, wine, or spirits?"),
    ("Doctor visits", "How many times did you consult a general practitioner last year?"),
    ("Exercise", "On how many days per week do you engage in vigorous sport?"),
    ("Loneliness", "How often do you feel isolated from friends and neighbours?"),
    ("Life satisfaction", "All things considered, how content are you with your life nowadays?"),
    ("Household income", "What is the total monthly net earnings of your household?"),
    ("Job security", "How likely is it that you will lose your job within two years?"),
    ("Commute time", "How many minutes does your daily journey to work take?"),
    ("Housing tenure", "Do you own your dwelling or rent it from a landlord?"),
    ("Childcare hours", "How many hours per week do grandparents look after your children?"),
    ("Volunteering", "Did you do unpaid charity work for a club or association?"),
    ("Religious attendance", "Apart from weddings and funerals, how often do you attend church services?"),
    ("Pension worries", "Are you anxious about having enough money after retirement?"),
    ("Chronic illness", "Do you suffer from a longstanding disease or disability?"),
    ("Dietary habits", "How many portions of fruit and vegetables do you eat each day?"),
    ("Stress at work", "Does your employer expect unpaid overtime from staff?"),
    ("Neighbourhood safety", "Do you feel safe walking alone after dark in your area?"),
]

QUESTIONS_C = [
    ("Vertrauen Bundestag", "Wie sehr vertrauen Sie dem Bundestag in Berlin?"),
    ("Wahlbeteiligung", "Haben Sie bei der letzten Landtagswahl Ihre Stimme abgegeben?"),
    ("Parteineigung", "Neigen Sie längerfristig einer bestimmten Partei zu?"),
    ("Arbeitslosigkeit", "Waren Sie in den vergangenen zehn Jahren jemals arbeitslos gemeldet?"),
    ("Mietbelastung", "Welchen Anteil Ihres Einkommens geben Sie monatlich für Miete aus?"),
    ("Ehrenamt", "Engagieren Sie sich unentgeltlich in einem Sportverein oder Chor?"),
    ("Gesundheitszustand", "Wie würden Sie Ihren derzeitigen Gesundheitszustand beschreiben?"),
    ("Zuwanderung", "Sollte Deutschland mehr Fachkräfte aus dem Ausland anwerben?"),
    ("Klimasorgen", "Machen Sie sich Sorgen über die Folgen des Klimawandels?"),
    ("Kirchgang", "Wie oft besuchen Sie einen Gottesdienst?"),
    ("Pendelweg", "Wie viele Kilometer legen Sie täglich zur Arbeitsstelle zurück?"),
    ("Rentenerwartung", "Erwarten Sie im Alter eine ausreichende gesetzliche Rente?"),
    ("Nachbarschaft", "Kennen Sie die Namen Ihrer unmittelbaren Nachbarn?"),
    ("Mediennutzung", "Schauen Sie abends regelmäßig die Tagesschau im Fernsehen?"),
    ("Lebenszufriedenheit", "Wie glücklich sind Sie gegenwärtig mit Ihrem Leben insgesamt?"),
    ("Einkommensgerechtigkeit", "Erhalten Sie im Vergleich zu anderen Ihren gerechten Anteil?"),
    ("Europabild", "Hat die Mitgliedschaft in der Europäischen Union unserem Land genützt?"),
    ("Digitalisierung", "Nutzen Sie Online-Banking für Ihre Überweisungen?"),
    ("Wohneigentum", "Besitzen Sie ein eigenes Haus oder eine Eigentumswohnung?"),
    ("Kinderwunsch", "Wünschen Sie sich in Zukunft weitere Kinder?"),
]

CATEGORIES = {
    "ds-polit": [["Agree", "Disagree"], ["Often", "Rarely", "Never"], ["Yes", "No"]],
    "ds-health": [["Daily", "Weekly", "Monthly"], ["Yes", "No"], ["Low", "Medium", "High"]],
    "ds-panel-de": [["Ja", "Nein"], ["Oft", "Selten", "Nie"], ["Sehr", "Kaum"]],
}

DATASETS = [
    ("ds-polit", "Comparative Political Attitudes Study", QUESTIONS_A),
    ("ds-health", "Household Health and Living Conditions Panel", QUESTIONS_B),
    ("ds-panel-de", "Sozialwissenschaftliches Haushaltspanel", QUESTIONS_C),
]

BACKGROUND_EN = [
    "Political behaviour has long been studied through the lens of institutional design.",
    "Our analysis draws on a pooled cross-section spanning several European countries.",
    "Prior work has emphasised the role of education in shaping civic engagement.",
    "We estimate multilevel logistic regressions with country random intercepts.",
    "The results are robust to alternative model specifications and sample restrictions.",
    "Younger cohorts display markedly different patterns than their parents.",
    "Regional differences persist even after controlling for economic conditions.",
    "Several limitations of this study deserve mention.",
    "Future research should examine causal mechanisms with panel data.",
    "Public health outcomes are closely tied to socioeconomic position.",
    "Inequality in wellbeing widened during the economic downturn.",
    "We discuss implications for welfare state policy and labour markets.",
    "Descriptive statistics are reported in the appendix tables.",
    "Missing data were handled through multiple imputation with twenty draws.",
    "Interaction terms reveal heterogeneous effects across income groups.",
    "The theoretical framework builds on social capital arguments.",
    "Figures illustrate predicted probabilities with confidence intervals.",
    "Urban residents differ systematically from rural populations.",
    "These findings contribute to debates about democratic legitimacy.",
    "Gender gaps narrowed considerably over the observation period.",
    "Migration background is associated with distinct participation profiles.",
    "Housing costs have risen sharply in metropolitan regions.",
    "The welfare regime typology offers a useful comparative framework.",
    "Media consumption patterns shifted with the spread of smartphones.",
]

BACKGROUND_DE = [
    "Die politische Kultur in Deutschland hat sich seit der Wiedervereinigung gewandelt.",
    "Unsere Analyse stützt sich auf eine repräsentative Stichprobe privater Haushalte.",
    "Frühere Studien betonen die Bedeutung der Bildung für gesellschaftliche Teilhabe.",
    "Wir schätzen lineare Regressionsmodelle mit robusten Standardfehlern.",
    "Die Ergebnisse bleiben auch unter alternativen Annahmen stabil.",
    "Regionale Unterschiede zwischen Ost und West bestehen fort.",
    "Abschließend diskutieren wir Folgerungen für die Sozialpolitik.",
    "Jüngere Kohorten unterscheiden sich deutlich von älteren Jahrgängen.",
    "Die Wohnkosten sind in den Großstädten stark gestiegen.",
    "Weitere Forschung sollte kausale Mechanismen genauer untersuchen.",
]

DISTRACTORS_EN = [
    "The questionnaire was fielded online and each survey wave included a short methods appendix.",
    "Respondents completed the survey in roughly twenty minutes on average.",
    "Item nonresponse in the questionnaire remained below five percent in every country.",
]
DISTRACTORS_DE = [
    "Der Fragebogen wurde von geschulten Interviewern erhoben und die Befragten erhielten eine Aufwandsentschädigung.",
]

TITLES_EN = [
    "Institutional Trust and Civic Participation in Europe",
    "Health Inequalities Across the Life Course",
    "Partisanship and Media Exposure in Election Campaigns",
    "Work, Stress and Wellbeing in Modern Households",
    "Protest, Petitions and Political Voice",
    "Social Capital and Neighbourhood Cohesion",
    "Economic Insecurity and Attitudes Toward Redistribution",
    "Religion, Volunteering and Community Life",
    "Ageing, Pensions and Retirement Expectations",
    "Digital Media and Political Information",
    "Lifestyle Risks and Chronic Disease",
    "Housing Markets and Family Formation",
    "Democratic Satisfaction After the Financial Crisis",
    "Commuting, Time Use and Life Satisfaction",
    "Judicial Legitimacy in Comparative Perspective",
]
TITLES_DE = [
    "Politisches Vertrauen im vereinten Deutschland",
    "Arbeitsmarkt und Lebenszufriedenheit",
    "Ehrenamt und gesellschaftlicher Zusammenhalt",
    "Wohnen, Pendeln und Familie",
    "Mediennutzung und politische Bildung",
]

SURNAMES = ["Becker", "Novak", "Rossi", "Lindqvist", "Meyer", "Dubois", "Kowalski", "Schmidt",
            "Jansen", "Fischer", "Garcia", "Weber", "Hansen", "Wagner", "Costa"]


def build():
    datasets, variables = [], []
    for ds_id, ds_title, questions in DATASETS:
        ids = []
        for i, (label, q) in enumerate(questions, start=1):
            vid = f"{ds_id}-v{i:02d}"
            ids.append(vid)
            variables.append({
                "id": vid,
                "dataset_id": ds_id,
                "label": label,
                "question_text": q,
                "answer_categories": CATEGORIES[ds_id][i % 3],
            })
        datasets.append({"id": ds_id, "title": ds_title, "variable_ids": ids})
    by_id = {v["id"]: v for v in variables}

    # Publications 1-15 English, 16-20 German.
    pubs = []
    en_dataset_sets = [["ds-polit"], ["ds-health"], ["ds-polit", "ds-health"]]
    # planted: 14 English (ds-polit / ds-health), 4 German (ds-panel-de)
    en_pool = [v["id"] for v in variables if v["dataset_id"] != "ds-panel-de"]
    de_pool = [v["id"] for v in variables if v["dataset_id"] == "ds-panel-de"]
    planted_en = RNG.sample(en_pool, 14)
    planted_de = RNG.sample(de_pool, 4)
    distractor_pubs = {3: DISTRACTORS_EN[0], 8: DISTRACTORS_EN[1], 12: DISTRACTORS_EN[2], 18: DISTRACTORS_DE[0]}

    gold = []
    en_plants = {}
    for vid in planted_en:
        ds = by_id[vid]["dataset_id"]
        # assign to an English publication whose datasets include ds
        candidates = [n for n in range(1, 16) if ds in en_dataset_sets[(n - 1) % 3] and len(en_plants.get(n, [])) < 2]
        n = RNG.choice(candidates)
        en_plants.setdefault(n, []).append(vid)
    de_plants = {16 + i: [vid] for i, vid in enumerate(planted_de)}
    plants = {**en_plants, **de_plants}

    for n in range(1, 21):
        pid = f"pub-{n:03d}"
        german = n > 15
        background = BACKGROUND_DE if german else BACKGROUND_EN
        sentences = RNG.sample(background, 5 if german else 6)
        for vid in plants.get(n, []):
            sentences.insert(RNG.randrange(1, len(sentences)), by_id[vid]["question_text"])
        if n in distractor_pubs:
            sentences.insert(RNG.randrange(1, len(sentences)), distractor_pubs[n])
        for vid in plants.get(n, []):
            gold.append({"publication_id": pid, "sentence_index": sentences.index(by_id[vid]["question_text"]),
                         "variable_id": vid})
        abstract = " ".join(RNG.sample(background, 2))
        pubs.append({
            "id": pid,
            "title": TITLES_DE[n - 16] if german else TITLES_EN[n - 1],
            "abstract": abstract,
            "authors": sorted(RNG.sample(SURNAMES, RNG.randint(1, 3))),
            "year": RNG.randint(2004, 2023),
            "lang": "de" if german else "en",
            "dataset_ids": ["ds-panel-de"] if german else en_dataset_sets[(n - 1) % 3],
            "full_text": " ".join(sentences),
        })
    gold.sort(key=lambda g: (g["publication_id"], g["sentence_index"]))
    return pubs, datasets, variables, gold


def write(name, records):
    with open(OUT / name, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def main():
    pubs, datasets, variables, gold = build()
    OUT.mkdir(parents=True, exist_ok=True)
    write("publications.jsonl", pubs)
    write("datasets.jsonl", datasets)
    write("variables.jsonl", variables)
    write("gold_links.jsonl", gold)
    print(f"{len(pubs)} publications, {len(datasets)} datasets, {len(variables)} variables, {len(gold)} gold links")


if __name__ == "__main__":
    main()
