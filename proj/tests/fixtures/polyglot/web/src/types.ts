export interface Identified {
  id: string;
}

export interface Priced extends Identified {
  price: number;
}
